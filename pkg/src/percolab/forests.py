"""Uniform spanning trees of balls with free and wired boundary conditions.

Samples come from Wilson's algorithm (loop-erased walks, compiled).  The wired
measure collapses the boundary frontier to one root vertex; the collapse keeps
parallel edges, since merging them would change the measure.  Exact edge
probabilities use the effective resistance across the edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from percolab import _kernels
from percolab._rng import indexed_uniforms, word_seed
from percolab.graphs import Graph
from percolab.percolation import Config, clusters
from percolab.resistance import effective_resistance

STREAM_UST = 0xF0
STREAM_THIN = 0xF1


@dataclass(frozen=True, eq=False)
class ForestSample:
    """Spanning tree (free) or wired forest of ``host``.

    ``edges`` is a boolean mask over host edges.  ``parent[v]`` is the
    neighbour ``v`` points to (``-1`` for roots: the root vertex in free mode,
    every boundary vertex in wired mode).
    """

    host: Graph
    edges: np.ndarray
    parent: np.ndarray
    boundary_condition: str
    root: int

    def degrees(self):
        e = self.host.edges[self.edges]
        return np.bincount(e.ravel(), minlength=self.host.vertex_count)

    def degree(self, v):
        return int(self.degrees()[v])

    @property
    def is_oriented(self):
        return self.parent is not None

    def out_degrees(self):
        return (self.parent >= 0).astype(np.int64)

    def in_degrees(self):
        p = self.parent[self.parent >= 0]
        return np.bincount(p, minlength=self.host.vertex_count)

    def as_config(self):
        return Config.bond(self.host, self.edges)

    def check_invariants(self):
        """Acyclic and spanning; in wired mode after identifying the boundary."""
        g = self.host
        n = g.vertex_count
        e = g.edges[self.edges]
        if self.boundary_condition == "free":
            cd = clusters(self.as_config())
            assert cd.count == 1 and len(e) == n - 1, "not a spanning tree"
        else:
            # identify the boundary with one vertex: spanning tree on n - |B| + 1 nodes
            merged = np.arange(n)
            b = sorted(g.boundary)
            merged[b] = b[0]
            parent = list(range(n))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for u, v in e.tolist():
                a, c = find(merged[u]), find(merged[v])
                assert a != c, "cycle after wiring the boundary"
                parent[a] = c
            assert len(e) == n - len(b), "wired forest does not span"
        out = self.out_degrees()
        roots = self.parent < 0
        assert np.all(out[~roots] == 1) and np.all(out[roots] == 0)
        return True


def _tree_host(g):
    return g.edge_count == g.vertex_count - 1 and g.is_connected()


def wilson_ust(g, root, seed, trial=0):
    """Uniform spanning tree of ``g``, oriented toward ``root``.

    Walks start from vertices in index order.  A tree host is returned as is.
    """
    if not g.is_connected():
        raise ValueError("host graph is disconnected")
    root = int(root)
    n = g.vertex_count
    if _tree_host(g):
        parent = _orient_tree(g, root)
        return ForestSample(g, np.ones(g.edge_count, dtype=bool), parent, "free", root)
    indptr, indices, eids = g.csr
    order = np.arange(n, dtype=np.int64)
    nxt = _kernels.wilson(indptr, indices, order, root, word_seed(seed, STREAM_UST, trial))
    mask = np.zeros(g.edge_count, dtype=bool)
    has = nxt >= 0
    mask[eids[nxt[has]]] = True
    parent = np.full(n, -1, dtype=np.int64)
    parent[has] = indices[nxt[has]]
    return ForestSample(g, mask, parent, "free", root)


def _orient_tree(g, root):
    parent = np.full(g.vertex_count, -1, dtype=np.int64)
    seen = np.zeros(g.vertex_count, dtype=bool)
    seen[root] = True
    stack = [root]
    while stack:
        u = stack.pop()
        for w in g.adjacency[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                stack.append(w)
    return parent


def ust_free(g, seed, trial=0):
    """Free spanning forest of the ball: the UST of ``g`` rooted at the basepoint."""
    return wilson_ust(g, g.basepoint, seed, trial)


@dataclass(frozen=True, eq=False)
class _Wired:
    indptr: np.ndarray
    targets: np.ndarray
    edge_of: np.ndarray
    node: np.ndarray
    root: int


def _wired_multigraph(g):
    """CSR multigraph with the boundary merged into node ``k - 1``."""
    n = g.vertex_count
    bmask = g.boundary_mask
    node = np.full(n, -1, dtype=np.int64)
    inner = np.flatnonzero(~bmask)
    node[inner] = np.arange(len(inner))
    root = len(inner)
    node[bmask] = root
    e = g.edges
    a, b = node[e[:, 0]], node[e[:, 1]]
    keep = a != b  # edges inside the boundary become loops and are dropped
    ids = np.flatnonzero(keep)
    heads = np.concatenate([a[keep], b[keep]])
    tails = np.concatenate([b[keep], a[keep]])
    eid = np.concatenate([ids, ids])
    order = np.lexsort((eid, heads))
    k = root + 1
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(np.bincount(heads, minlength=k), out=indptr[1:])
    return _Wired(indptr, tails[order], eid[order], node, root)


def ust_wired(g, seed, trial=0, _cache=None):
    """Wired spanning forest of the ball: the UST of ``g`` with its boundary
    identified to one root.  Forest edges keep their original endpoints."""
    if not g.boundary:
        raise ValueError("wired forests need a nonempty boundary")
    w = _cache if _cache is not None else _wired_multigraph(g)
    k = w.root + 1
    order = np.arange(k, dtype=np.int64)
    nxt = _kernels.wilson(w.indptr, w.targets, order, w.root,
                          word_seed(seed, STREAM_UST, trial))
    has = nxt >= 0
    chosen = nxt[has]
    mask = np.zeros(g.edge_count, dtype=bool)
    mask[w.edge_of[chosen]] = True
    parent = np.full(g.vertex_count, -1, dtype=np.int64)
    inner = np.flatnonzero(~g.boundary_mask)
    # inner vertex i (node i) points along half-edge chosen[i] to the host endpoint
    # that is not itself
    e = g.edges[w.edge_of[chosen]]
    me = inner[np.flatnonzero(has)]
    parent[me] = np.where(e[:, 0] == me, e[:, 1], e[:, 0])
    return ForestSample(g, mask, parent, "wired", -1)


# ------------------------------------------------------- statistics ------

@dataclass(frozen=True)
class DegreeReport:
    """Mean forest degree of the basepoint with a 3-sigma interval."""

    mean: float
    stderr: float
    trials: int
    boundary_condition: str
    host: str
    exact: bool = False

    @property
    def ci(self):
        return (self.mean - 3 * self.stderr, self.mean + 3 * self.stderr)


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


def basepoint_degrees(g, boundary_condition, trials, seed):
    """Forest degree of the basepoint in each of ``trials`` samples."""
    o = g.basepoint
    if boundary_condition == "free":
        if _tree_host(g):
            return np.full(trials, len(g.adjacency[o]))
        return np.array([ust_free(g, seed, i).degree(o) for i in range(trials)])
    if boundary_condition != "wired":
        raise ValueError(f"unknown boundary condition {boundary_condition!r}")
    w = _wired_multigraph(g)
    out = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        nxt = _kernels.wilson(w.indptr, w.targets, np.arange(w.root + 1, dtype=np.int64),
                              w.root, word_seed(seed, STREAM_UST, i))
        chosen = g.edges[w.edge_of[nxt[nxt >= 0]]]
        out[i] = np.count_nonzero((chosen == o).any(axis=1))
    return out


def degree_report(g, boundary_condition, trials, seed):
    """Monte Carlo mean of the basepoint's forest degree.

    The free report on a tree host is exact: the ball is its own spanning tree.
    """
    exact = boundary_condition == "free" and _tree_host(g)
    degs = basepoint_degrees(g, boundary_condition, trials, seed)
    mean, se = _mean_se(degs)
    return DegreeReport(mean, se, int(trials), boundary_condition, g.family_tag, exact)


@dataclass(frozen=True)
class Threshold:
    value: Fraction | float
    ci: tuple
    vacuous: bool


def p0_threshold(report):
    """``2 / E_free[deg]`` from a free :class:`DegreeReport` (or a graph, sampled).

    When the free degree is at most 2 the threshold is not below 1 and is
    flagged ``vacuous``.
    """
    if isinstance(report, Graph):
        report = degree_report(report, "free", 2000, 0)
    if report.boundary_condition != "free":
        raise ValueError("the threshold uses the free forest")
    m = report.mean
    if report.exact:
        value = Fraction(2) / Fraction(m).limit_denominator(1)
    else:
        value = 2.0 / m
    lo, hi = report.ci
    ci = (2.0 / hi if hi > 0 else math.inf, 2.0 / lo if lo > 0 else math.inf)
    return Threshold(value, ci, m <= 2)


@dataclass(frozen=True)
class OrientationAudit:
    out_ok: bool
    out_total: int
    in_total: int
    edges: int
    interior_mean_out: float
    interior_mean_in: float
    basepoint_in: int


def owsf_degree_audit(sample):
    """Out-degree 1 off the roots and ``sum out = sum in = #edges``."""
    if sample.parent is None:
        raise ValueError("sample is not oriented")
    out = sample.out_degrees()
    inn = sample.in_degrees()
    roots = sample.parent < 0
    inner = ~sample.host.boundary_mask
    return OrientationAudit(bool(np.all(out[~roots] == 1) and np.all(out[roots] == 0)),
                            int(out.sum()), int(inn.sum()), int(sample.edges.sum()),
                            float(out[inner].mean()), float(inn[inner].mean()),
                            int(inn[sample.host.basepoint]))


# ----------------------------------------------------- exact probes ------

def edge_prob_exact(obj, e, exact=True):
    """``P[e in UST]`` as the effective resistance between the ends of ``e``."""
    g = obj.host if isinstance(obj, Config) else obj
    u, v = (int(x) for x in (g.edges[e] if np.isscalar(e) else e))
    eid = g.edge_id(u, v)
    if isinstance(obj, Config) and not obj.edges[eid]:
        raise ValueError("edge is absent from the configuration")
    return effective_resistance(obj, u, [v], exact=exact).value


def rayleigh_monotonicity_check(g, sub, e):
    """``(p_sub, p_full)`` for an edge present in ``sub``; asserts ``p_sub >= p_full``."""
    p_sub = edge_prob_exact(sub, e)
    p_full = edge_prob_exact(g, e)
    if p_sub < p_full:
        raise AssertionError(f"monotonicity violated: {p_sub} < {p_full}")
    return p_sub, p_full


def degree_dichotomy(g, trials, seed, keep=0.9):
    """Basepoint degree in a thinned wired forest, split by whether the
    basepoint's component reaches the boundary.

    Each wired-forest edge is kept independently with probability ``keep``
    (an invariant thinning).  Returns ``((mean, se, n) touching, (mean, se, n)
    interior)``.
    """
    w = _wired_multigraph(g)
    o = g.basepoint
    touching, interior = [], []
    for i in range(trials):
        f = ust_wired(g, seed, i, _cache=w)
        u = indexed_uniforms(seed, g.edge_count, STREAM_THIN, i)
        cfg = Config.bond(g, f.edges & (u < keep))
        cd = clusters(cfg)
        d = int(cfg.degrees()[o])
        (touching if cd.touches_boundary[cd.label[o]] else interior).append(d)

    def summary(xs):
        if not xs:
            return (float("nan"), float("nan"), 0)
        m, s = _mean_se(xs)
        return (m, s, len(xs))

    return summary(touching), summary(interior)


def expected_degree_exact(g, boundary_condition, exact=False):
    """``E[deg(o)]`` under the free or wired measure, by Kirchhoff:
    the sum over edges at ``o`` of the resistance across each edge."""
    o = g.basepoint
    if boundary_condition not in ("free", "wired"):
        raise ValueError(f"unknown boundary condition {boundary_condition!r}")
    glue = g.boundary if boundary_condition == "wired" else ()
    vals = [effective_resistance(g, o, [c], exact=exact, identify=glue).value
            for c in g.adjacency[o]]
    return sum(vals, Fraction(0)) if exact else float(sum(vals))
