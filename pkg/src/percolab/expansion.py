"""Edge boundaries, average induced degree, and exhaustive isoperimetric searches.

All ratios are exact :class:`fractions.Fraction` values.  The searches range
over *connected* vertex sets that avoid the boundary frontier; on forests a
subtree dynamic programme is used, elsewhere a branch-and-bound enumeration of
connected sets (each set visited once, smallest vertex first).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import numpy as np

DEFAULT_EXHAUSTIVE_CAP = 20
INF = 1 << 60


class CapExceededError(ValueError):
    """Requested enumeration size is above the exhaustive cap."""


class NoAdmissibleSetError(ValueError):
    """No admissible set exists (e.g. the ball has no interior)."""


def edge_boundary(g, S):
    """Indices of edges with exactly one endpoint in ``S``."""
    inside = np.zeros(g.vertex_count, dtype=bool)
    inside[list(S)] = True
    e = g.edges
    return frozenset(np.flatnonzero(inside[e[:, 0]] != inside[e[:, 1]]).tolist())


def induced_edge_count(g, K):
    K = set(K)
    return sum(1 for v in K for w in g.adjacency[v] if w in K) // 2


def alpha_K(g, K):
    """Average degree of the subgraph induced by ``K``: ``2 |E(K)| / |K|``."""
    K = set(int(v) for v in K)
    if not K:
        raise ValueError("alpha_K needs a nonempty vertex set")
    return Fraction(2 * induced_edge_count(g, K), len(K))


@dataclass(frozen=True)
class SizeOptimum:
    size: int
    boundary: int
    witness: tuple

    @property
    def ratio(self):
        return Fraction(self.boundary, self.size)


@dataclass(frozen=True)
class IsoperimetricResult:
    value: Fraction
    witness: tuple
    per_size: tuple
    max_size: int


@dataclass(frozen=True)
class ExpansionProfile:
    """``values[i] = (n, min ratio over admissible S with n <= |S| <= max_size)``."""

    values: tuple
    witness_sets: tuple
    max_size: int = 0
    per_size: tuple = field(default=(), repr=False)

    def value_at(self, n):
        return dict(self.values)[n]


class _Space:
    """Search space: host adjacency, host degrees and the admissible vertices."""

    def __init__(self, adjacency, degrees, allowed):
        self.adj = adjacency
        self.deg = degrees
        self.allowed = allowed  # boolean list
        self.nb = [tuple(w for w in adjacency[v] if allowed[w]) if allowed[v] else ()
                   for v in range(len(adjacency))]

    def is_forest(self):
        n = len(self.adj)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for v in range(n):
            for w in self.nb[v]:
                if v < w:
                    a, b = find(v), find(w)
                    if a == b:
                        return False
                    parent[a] = b
        return True


def _space_for(g, allowed=None, adjacency=None, degrees=None):
    adjacency = g.adjacency if adjacency is None else adjacency
    if degrees is None:
        degrees = [len(a) for a in adjacency]
    if allowed is None:
        allowed = [not b for b in g.boundary_mask.tolist()]
    return _Space(adjacency, list(degrees), list(allowed))


# ------------------------------------------------------------ forests ----

def _merge_plan(max_size):
    a, b = np.meshgrid(np.arange(1, max_size + 1), np.arange(1, max_size + 1), indexing="ij")
    keep = (a + b) <= max_size
    a, b = a[keep], b[keep]
    order = np.argsort(a + b, kind="stable")
    a, b = a[order], b[order]
    total = (a + b)
    starts = np.flatnonzero(np.r_[True, total[1:] != total[:-1]])
    return a, b, starts, total[starts]


def _merge(cur, child, plan):
    """Min-plus merge of two size-indexed subtree tables."""
    a, b, starts, sizes = plan
    merged = cur.copy()
    if len(a):
        vals = np.minimum.reduceat(cur[a] + child[b], starts)
        np.minimum(merged[sizes], vals, out=vals)
        merged[sizes] = vals
    return merged


def _forest_dp(space, max_size, roots):
    """Subtree knapsack on the admissible forest.

    Returns ``dp`` (per vertex, min host-degree sum of a subtree topped at the
    vertex, per size) and ``trail`` for witness reconstruction.
    """
    n = len(space.adj)
    K = max_size + 1
    deg = np.asarray(space.deg, dtype=np.int64)
    plan = _merge_plan(max_size)
    dp = {}
    trail = {}
    seen = [False] * n
    for r in roots:
        if seen[r] or not space.allowed[r]:
            continue
        order = []
        parent = {r: -1}
        stack = [r]
        seen[r] = True
        while stack:
            v = stack.pop()
            order.append(v)
            for w in space.nb[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    stack.append(w)
        for v in reversed(order):
            cur = np.full(K, INF, dtype=np.int64)
            cur[1] = deg[v]
            steps = []
            for w in space.nb[v]:
                if parent.get(w) != v:
                    continue
                steps.append((w, cur))
                cur = _merge(cur, dp[w], plan)
            dp[v] = cur
            trail[v] = steps
    return dp, trail


def _forest_witness(dp, trail, v, k):
    out = [v]
    target = dp[v][k]
    for w, before in reversed(trail[v]):
        if k == 1:
            break
        if before[k] == target:
            continue
        child = dp[w]
        for b in range(1, k):
            if before[k - b] < INF and child[b] < INF and before[k - b] + child[b] == target:
                out.extend(_forest_witness(dp, trail, w, b))
                k -= b
                target = before[k]
                break
        else:  # pragma: no cover - dp invariant
            raise AssertionError("witness reconstruction failed")
    return out


def _forest_optima(space, max_size, anchor=None, size_limit=None):
    n = len(space.adj)
    if anchor is not None:
        dp, trail = _forest_dp(space, max_size, [anchor])
        tops = [anchor]
    else:
        dp, trail = _forest_dp(space, max_size, range(n))
        tops = sorted(dp)
    table = np.stack([dp[v] for v in tops]) if tops else np.zeros((0, max_size + 1))
    out = []
    for k in range(1, max_size + 1):
        if size_limit is not None and k > size_limit:
            break
        if not len(table) or table[:, k].min() >= INF:
            continue
        i = int(np.argmin(table[:, k]))
        v = tops[i]
        w = tuple(sorted(_forest_witness(dp, trail, v, k)))
        out.append(SizeOptimum(k, int(table[i, k]) - 2 * (k - 1), w))
    return out


# ------------------------------------------------ general enumeration ----

def _greedy_edges(space, k):
    """Cheap incumbent: grow from every vertex by the neighbor with most links."""
    best = -INF
    nb = space.nb
    for v in range(len(nb)):
        if not space.allowed[v]:
            continue
        S = {v}
        cnt = {u: 1 for u in nb[v]}
        e = 0
        while len(S) < k and cnt:
            w = max(cnt, key=lambda u: (cnt[u], -u))
            e += cnt.pop(w)
            S.add(w)
            for u in nb[w]:
                if u not in S:
                    cnt[u] = cnt.get(u, 0) + 1
        if len(S) == k:
            best = max(best, e)
    return best


def _search(space, k, floor_score, bestany, anchor=None, boundary_weight=0):
    """Best connected admissible ``k``-set for ``score = 2 e(S) - w * degsum(S)``.

    ``w = 0`` maximises induced edges, ``w = 1`` minimises the host boundary.
    Enumeration is the exclusive-neighbourhood scheme (each connected set once,
    rooted at its smallest vertex, or at ``anchor``).  Branches are cut with an
    upper bound on the score of any completion; sets scoring below
    ``floor_score`` are never reported.  Ties resolve to the lexicographically
    smallest sorted vertex tuple.  Returns ``(score, witness)`` or ``(None, None)``.
    """
    nb = space.nb
    deg = space.deg
    allowed_deg = [len(x) for x in nb]
    dmax = max(allowed_deg[v] for v in range(len(nb)) if space.allowed[v])
    dmin = min(deg[v] for v in range(len(nb)) if space.allowed[v])
    wgt = boundary_weight
    best = [floor_score, None]

    def upper(size, e_S, dsum, ext, cnt):
        rem = k - size
        top = sorted((cnt[u] for u in ext), reverse=True)[:rem]
        x = sum(top)
        inner = min(2 * bestany[rem], rem * dmax - x)
        return 2 * (e_S + x) + inner - wgt * (dsum + rem * dmin)

    def extend(S, ext, e_S, dsum, cnt, nbhd, root):
        if len(S) == k:
            score = 2 * e_S - wgt * dsum
            w = tuple(sorted(S))
            if score > best[0] or (score == best[0] and (best[1] is None or w < best[1])):
                best[0], best[1] = score, w
            return
        ub = upper(len(S), e_S, dsum, ext, cnt)
        if ub < best[0] or (ub == best[0] and best[1] is not None and root is not None
                            and best[1][0] < root):
            return
        ext = list(ext)
        while ext:
            w = ext.pop()
            gain = cnt.get(w, 0)
            new_ext = list(ext)
            added = []
            for u in nb[w]:
                if u not in nbhd:
                    added.append(u)
                    if root is None or u > root:
                        new_ext.append(u)
            S.add(w)
            for u in nb[w]:
                cnt[u] = cnt.get(u, 0) + 1
            nbhd.update(added)
            extend(S, new_ext, e_S + gain, dsum + deg[w], cnt, nbhd, root)
            nbhd.difference_update(added)
            S.discard(w)
            for u in nb[w]:
                cnt[u] -= 1

    roots = [anchor] if anchor is not None else [v for v in range(len(nb)) if space.allowed[v]]
    for v in roots:
        if not space.allowed[v]:
            continue
        cnt = {}
        for u in nb[v]:
            cnt[u] = 1
        nbhd = {v, *nb[v]}
        root = v if anchor is None else None
        ext = [u for u in nb[v] if root is None or u > root]
        extend({v}, ext, 0, deg[v], cnt, nbhd, root)
    if best[1] is None:
        return None, None
    return best[0], best[1]


def _general_optima(space, max_size, anchor=None, size_limit=None, orbit_root=None):
    """Per-size optima by branch and bound.

    A max-edge search runs first for every size; it is the answer when all
    admissible vertices share one host degree and no anchor is imposed, and it
    feeds the edge bound of the direct min-boundary search otherwise.
    ``orbit_root`` (vertex-transitive hosts only) restricts the max-edge search
    to sets containing that vertex, which loses nothing up to translation.
    """
    degs = {space.deg[v] for v in range(len(space.adj)) if space.allowed[v]}
    if not degs:
        return []
    limit = max_size if size_limit is None else min(max_size, size_limit)
    best_conn = [0] * (limit + 1)
    bestany = [0] * (limit + 1)
    witnesses = {}
    for k in range(1, limit + 1):
        floor = max(best_conn[k - 1] + 1 if k > 1 else 0, _greedy_edges(space, k))
        e2, w = _search(space, k, 2 * floor, bestany, anchor=orbit_root)
        if e2 is None:
            e2, w = _search(space, k, -INF, bestany, anchor=orbit_root)
        if e2 is None:
            break
        best_conn[k] = e2 // 2
        witnesses[k] = w
        bestany[k] = max([best_conn[k]] + [bestany[a] + bestany[k - a] for a in range(1, k)])
    if anchor is None and len(degs) == 1:
        (d,) = degs
        return [SizeOptimum(k, d * k - 2 * best_conn[k], witnesses[k]) for k in sorted(witnesses)]
    out = []
    for k in sorted(witnesses):
        score, w = _search(space, k, -INF, bestany, anchor=anchor, boundary_weight=1)
        if score is not None:
            out.append(SizeOptimum(k, -score, w))
    return out


def size_optima(space, max_size, anchor=None, size_limit=None, orbit_root=None):
    """Per-size minimal host boundary of connected admissible sets."""
    if space.is_forest():
        return _forest_optima(space, max_size, anchor, size_limit)
    return _general_optima(space, max_size, anchor, size_limit, orbit_root)


def _check_cap(max_size, cap):
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if max_size > cap:
        raise CapExceededError(f"max_size {max_size} exceeds exhaustive cap {cap}")


def iso_edge_bruteforce(g, max_size, cap=DEFAULT_EXHAUSTIVE_CAP):
    """Minimum of ``|boundary(S)| / |S|`` over connected interior ``S``, ``|S| <= max_size``.

    On boundary-free graphs sets larger than half the vertex count are excluded.
    Returns an :class:`IsoperimetricResult`; ``per_size`` lists the optimum for
    every size.
    """
    _check_cap(max_size, cap)
    space = _space_for(g)
    limit = g.vertex_count // 2 if not g.boundary else None
    opt = size_optima(space, max_size, size_limit=limit)
    if not opt:
        raise NoAdmissibleSetError("no admissible set (graph has no interior)")
    best = min(opt, key=lambda s: (s.ratio, s.witness))
    return IsoperimetricResult(best.ratio, best.witness, tuple(opt), max_size)


def alpha_sup(g, max_size, cap=DEFAULT_EXHAUSTIVE_CAP):
    """``max alpha_K`` over connected admissible ``K`` with ``|K| <= max_size``.

    Boundary-free hosts tagged ``transitive`` (tori, cycles) search only sets
    through the basepoint.
    """
    _check_cap(max_size, cap)
    space = _space_for(g)
    limit = g.vertex_count // 2 if not g.boundary else None
    root = g.basepoint if (g.meta.get("transitive") and not g.boundary) else None
    opt = size_optima(space, max_size, size_limit=limit, orbit_root=root)
    if not opt:
        raise NoAdmissibleSetError("no admissible set")
    deg = space.deg
    return max(Fraction(sum(deg[v] for v in s.witness) - s.boundary, s.size) for s in opt)


def anchored_expansion_bruteforce(g, max_size, cap=DEFAULT_EXHAUSTIVE_CAP):
    """Anchored profile: for each ``n``, min ratio over connected interior ``S``
    containing the basepoint with ``n <= |S| <= max_size``."""
    _check_cap(max_size, cap)
    if g.basepoint in g.boundary:
        raise NoAdmissibleSetError("basepoint lies on the boundary")
    space = _space_for(g)
    limit = g.vertex_count // 2 if not g.boundary else None
    opt = size_optima(space, max_size, anchor=g.basepoint, size_limit=limit)
    if not opt:
        raise NoAdmissibleSetError("no admissible set containing the basepoint")
    values = []
    witnesses = []
    run = None
    for s in reversed(opt):
        if run is None or (s.ratio, s.witness) < (run.ratio, run.witness):
            run = s
        values.append((s.size, run.ratio))
        witnesses.append(run.witness)
    return ExpansionProfile(tuple(reversed(values)), tuple(reversed(witnesses)), max_size,
                            tuple(opt))


def min_ratio_in_subgraph(adjacency, allowed, max_size):
    """Min ``|boundary| / |W|`` over connected ``W`` (allowed vertices only) of a
    graph given by adjacency lists; boundary edges counted in that graph.

    Returns ``(ratio or None, witness)``.
    """
    space = _Space(adjacency, [len(a) for a in adjacency], allowed)
    opt = size_optima(space, max_size)
    if not opt:
        return None, ()
    best = min(opt, key=lambda s: (s.ratio, s.witness))
    return best.ratio, best.witness


@dataclass(frozen=True)
class GrowthProfile:
    spheres: tuple
    gr_estimate: float
    roots: tuple


def growth_profile(family, r_max):
    """Sphere sizes ``zeta_1..zeta_r_max`` and ``gr ~ min zeta_n^(1/n)``.

    ``family`` is a callable ``radius -> Graph`` (see
    :func:`percolab.graphs.parse_family`), a family DSL string, or a
    :class:`~percolab.graphs.RegularTree`.
    """
    from percolab.graphs import RegularTree, parse_family

    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    if isinstance(family, RegularTree):
        zeta = [family.sphere_size(k) for k in range(1, r_max + 1)]
    else:
        if isinstance(family, str):
            family = parse_family(family)
        g = family(r_max)
        d = g.base_distances
        counts = np.bincount(d[d >= 0], minlength=r_max + 1)
        zeta = [int(c) for c in counts[1:r_max + 1]]
    roots = tuple(z ** (1.0 / n) for n, z in enumerate(zeta, 1))
    return GrowthProfile(tuple(zeta), min(roots), roots)
