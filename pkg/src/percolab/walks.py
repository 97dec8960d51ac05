"""Random walks on balls, percolation clusters and the implicit regular tree.

Three walk kinds are provided: the simple walk, the delayed walk (propose the
current vertex or a uniform host neighbour, move only along occupied edges)
and the walk induced by the delayed walk on a vertex subset.  Exact laws
``mu_t`` come from repeated transition products; on the regular tree they are
lumped by distance, since ``mu_t`` is constant on spheres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np
from scipy import sparse

from percolab import _kernels
from percolab._rng import word_seed
from percolab.graphs import Graph, RegularTree
from percolab.percolation import Config

STREAM_WALK = 0x3A1C
STREAM_REFERENCE = 0x3A1E
DEFAULT_BUDGET = 1_000_000


class ContaminationError(ValueError):
    """Requested time would let the walk feel the ball boundary."""


@dataclass(frozen=True, eq=False)
class WalkPath:
    """One trajectory.

    ``vertices`` is ``None`` on the implicit tree, where ``moves`` encodes the
    path (see :meth:`vertex`).  ``distances`` are host distances from the
    basepoint.  ``absorbed`` flags a run stopped at the boundary frontier and
    ``truncated`` an induced run whose excursion budget ran out.
    """

    kind: str
    distances: np.ndarray
    vertices: np.ndarray | None = None
    moves: np.ndarray | None = None
    return_times: np.ndarray | None = None
    absorbed: bool = False
    truncated: bool = False
    steps: int = 0
    host: Any = None
    config: Any = None

    def __len__(self):
        return len(self.distances)

    def vertex(self, t):
        """Vertex at time ``t`` (a word on the implicit tree)."""
        if self.vertices is not None:
            return int(self.vertices[t])
        degree = self.host.degree
        word = []
        for k in self.moves[:t].tolist():
            if k >= degree:
                continue
            if not word:
                word.append(k)
            elif k == 0:
                word.pop()
            else:
                word.append(k - 1)
        return tuple(word)


def _as_config(obj):
    if isinstance(obj, Config):
        return obj.host, obj
    if isinstance(obj, Graph):
        return obj, Config.full(obj)
    raise TypeError(f"expected a Graph or Config, got {type(obj).__name__}")


def _check_steps(steps):
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    return steps


def _tree_walk(tree, steps, seed, trial, delayed, cfg):
    if cfg is not None:
        raise ValueError("walks on the implicit tree run on the full tree only")
    kind = "delayed" if delayed else "simple"
    moves, dist = _kernels.walk_tree_moves(tree.degree, steps, delayed,
                                           word_seed(seed, STREAM_WALK, trial))
    return WalkPath(kind, dist, moves=moves, steps=steps, host=tree)


def walk_simple(obj, steps, seed, trial=0):
    """Simple random walk from the basepoint.

    ``obj`` is a :class:`Graph`, a :class:`Config` (walk along occupied edges)
    or a :class:`RegularTree`.  Runs stop early, flagged ``absorbed``, on
    reaching the boundary.
    """
    steps = _check_steps(steps)
    if isinstance(obj, RegularTree):
        return _tree_walk(obj, steps, seed, trial, False, None)
    g, cfg = _as_config(obj)
    o = g.basepoint
    if not cfg.vertices[o] or cfg.degrees()[o] == 0:
        raise ValueError("basepoint is isolated in the walked graph")
    return _run(g, cfg, steps, seed, trial, delayed=False)


def walk_delayed(obj, steps, seed, trial=0):
    """Delayed walk: propose the current vertex or a uniform host neighbour,
    move only if the proposed edge is occupied."""
    steps = _check_steps(steps)
    if isinstance(obj, RegularTree):
        return _tree_walk(obj, steps, seed, trial, True, None)
    g, cfg = _as_config(obj)
    if not cfg.vertices[g.basepoint]:
        raise ValueError("basepoint is not occupied")
    return _run(g, cfg, steps, seed, trial, delayed=True)


def _run(g, cfg, steps, seed, trial, delayed):
    indptr, indices, eids = g.csr
    path, n = _kernels.walk_graph(indptr, indices, eids, cfg.edges, g.boundary_mask,
                                  g.basepoint, steps, delayed,
                                  word_seed(seed, STREAM_WALK, trial))
    if n < 0:
        raise RuntimeError("walk reached an isolated vertex")
    path = path[:n].copy()
    absorbed = n < steps + 1
    return WalkPath("delayed" if delayed else "simple", g.base_distances[path], path,
                    absorbed=absorbed, steps=steps, host=g, config=cfg)


def walk_induced(cfg, vstar, steps, seed, trial=0, budget=DEFAULT_BUDGET):
    """The delayed walk watched on ``vstar``: ``Z*(k) = Z(t_k)``.

    ``return_times`` holds ``t_0 = 0 < t_1 < ...``.  The underlying delayed
    walk is the one :func:`walk_delayed` draws for the same ``(seed, trial)``,
    so ``Z*(k)`` is that path at time ``t_k``.  If an excursion outlasts
    ``budget`` delayed steps the path is cut there and flagged ``truncated``;
    failing before the first return raises.
    """
    steps = _check_steps(steps)
    g, cfg = _as_config(cfg)
    o = g.basepoint
    star = np.zeros(g.vertex_count, dtype=bool)
    star[list(vstar)] = True
    if not star[o]:
        raise ValueError("the basepoint must belong to vstar")
    if not cfg.vertices[star].all():
        raise ValueError("vstar contains unoccupied vertices")
    indptr, indices, eids = g.csr
    states, times, count, status = _kernels.walk_induced(
        indptr, indices, eids, cfg.edges, g.boundary_mask, star, o, steps, int(budget),
        word_seed(seed, STREAM_WALK, trial))
    if status == 1 and count == 1:
        raise RuntimeError(f"no return to vstar within {budget} steps")
    states = states[:count].copy()
    return WalkPath("induced", g.base_distances[states], states,
                    return_times=times[:count].copy(), absorbed=status == 2,
                    truncated=status == 1, steps=steps, host=g, config=cfg)


def walk_batch(obj, steps, trials, seed, kind="simple"):
    """``trials`` independent paths; trial ``i`` uses stream ``(seed, i)``."""
    fn = {"simple": walk_simple, "delayed": walk_delayed}[kind]
    return [fn(obj, steps, seed, trial=i) for i in range(trials)]


# ------------------------------------------------------------- speed -----

@dataclass(frozen=True)
class SpeedEstimate:
    """``speed`` is the mean of ``dist(X_T)/T``; ``liminf`` the mean over
    paths of the minimum of ``dist(X_t)/t`` on the grid ``T, T/2, T/4, T/8``."""

    speed: float
    stderr: float
    liminf: float
    T: int
    used: int
    absorbed: int

    @property
    def ci(self):
        return (self.speed - 3 * self.stderr, self.speed + 3 * self.stderr)


def speed_estimate(paths, grid_depth=3):
    """Speed and liminf-speed proxy from equal-length paths."""
    paths = list(paths)
    if not paths:
        raise ValueError("no paths given")
    T = max(p.steps for p in paths)
    if T < 1:
        raise ValueError("paths need at least one step")
    good = [p for p in paths if not p.absorbed and len(p) == T + 1]
    if not good:
        raise ValueError("all paths were absorbed at the boundary")
    grid = sorted({max(1, T >> k) for k in range(grid_depth + 1)})
    final = np.array([p.distances[T] / T for p in good])
    lows = np.array([min(p.distances[t] / t for t in grid) for p in good])
    sd = float(final.std(ddof=1)) if len(final) > 1 else 0.0
    return SpeedEstimate(float(final.mean()), sd / math.sqrt(len(final)), float(lows.mean()),
                         T, len(good), len(paths) - len(good))


# ------------------------------------------------------ exact laws -------

@dataclass(frozen=True)
class DistributionVector:
    """Law of the walk at time ``t``, grouped in classes of equal mass.

    Class ``i`` has ``multiplicity[i]`` vertices at host distance
    ``distance[i]``, each carrying probability ``values[i]``.  On explicit
    graphs every class is one vertex (``vertex[i]``); on the implicit tree the
    classes are spheres.
    """

    t: int
    values: tuple | np.ndarray
    multiplicity: np.ndarray
    distance: np.ndarray
    vertex: np.ndarray | None = None
    exact: bool = False

    def total(self):
        if self.exact:
            return sum(v * int(m) for v, m in zip(self.values, self.multiplicity))
        return math.fsum(float(v) * int(m) for v, m in zip(self.values, self.multiplicity))

    def as_float(self):
        return np.array([float(v) for v in self.values])

    def prob(self, v):
        """Probability of vertex ``v`` (explicit graphs)."""
        idx = np.flatnonzero(self.vertex == v)
        return self.values[int(idx[0])] if len(idx) else 0

    def ball_mass(self, r):
        mask = self.distance <= r
        return sum((self.values[i] * int(self.multiplicity[i]) for i in np.flatnonzero(mask)),
                   Fraction(0) if self.exact else 0.0)


def _transition(g):
    deg = g.degrees.astype(float)
    e = g.edges
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    w = 1.0 / deg[rows]
    return sparse.csr_matrix((w, (rows, cols)), shape=(g.vertex_count,) * 2)


def _check_time(g, t):
    t = int(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t >= g.radius:
        raise ContaminationError(f"t={t} is not below the ball radius {g.radius}")
    return t


def _tree_law(degree, t, exact):
    """Distance-chain law of the walk on ``T_degree`` at time ``t``."""
    one = Fraction(1) if exact else 1.0
    up = Fraction(degree - 1, degree) if exact else (degree - 1) / degree
    down = one - up
    law = [one]
    for _ in range(t):
        new = [0 * one] * (len(law) + 1)
        for k, m in enumerate(law):
            if not m:
                continue
            if k == 0:
                new[1] += m
            else:
                new[k + 1] += m * up
                new[k - 1] += m * down
        law = new
    return law


def distribution_exact(g, t, exact=False):
    """Exact law ``mu_t`` of the simple walk from the basepoint.

    ``exact=True`` uses rational arithmetic.  On a :class:`Graph` the time
    must stay below the ball radius.
    """
    if isinstance(g, RegularTree):
        t = int(t)
        if t < 0:
            raise ValueError("t must be nonnegative")
        law = _tree_law(g.degree, t, exact)
        ks = [k for k, m in enumerate(law) if m]
        # sphere sizes outgrow int64 past t ~ 60, so keep Python ints
        mult = np.array([g.sphere_size(k) for k in ks], dtype=object)
        if exact:
            values = tuple(law[k] / g.sphere_size(k) for k in ks)
        else:
            values = np.array([law[k] / g.sphere_size(k) for k in ks])
        return DistributionVector(t, values, mult, np.array(ks), None, exact)
    t = _check_time(g, t)
    o = g.basepoint
    if exact:
        cur = {o: Fraction(1)}
        adj = g.adjacency
        for _ in range(t):
            nxt = {}
            for v, m in cur.items():
                share = m / len(adj[v])
                for w in adj[v]:
                    nxt[w] = nxt.get(w, 0) + share
            cur = nxt
        verts = np.array(sorted(cur), dtype=np.int64)
        values = tuple(cur[int(v)] for v in verts)
    else:
        mu = np.zeros(g.vertex_count)
        mu[o] = 1.0
        PT = _transition(g).T.tocsr()
        for _ in range(t):
            mu = PT @ mu
        verts = np.flatnonzero(mu > 0)
        values = mu[verts]
    return DistributionVector(t, values, np.ones(len(verts), dtype=np.int64),
                              g.base_distances[verts], verts, exact)


def return_probabilities(g, t_max):
    """``p_t(o, o)`` for ``t = 0..t_max``."""
    if isinstance(g, RegularTree):
        out = [1.0]
        law = [1.0]
        up = (g.degree - 1) / g.degree
        for _ in range(t_max):
            new = [0.0] * (len(law) + 1)
            for k, m in enumerate(law):
                if k == 0:
                    new[1] += m
                else:
                    new[k + 1] += m * up
                    new[k - 1] += m * (1 - up)
            law = new
            out.append(law[0])
        return np.array(out)
    o = g.basepoint
    mu = np.zeros(g.vertex_count)
    mu[o] = 1.0
    PT = _transition(g).T.tocsr()
    out = [1.0]
    for _ in range(t_max):
        mu = PT @ mu
        out.append(mu[o])
    return np.array(out)


def spectral_radius_profile(g, t_max):
    """``p_{2t}(o, o)^(1/2t)`` for ``t = 1..t_max``.

    Even times only.  On a ball, ``t_max`` must be below the radius so the
    return probabilities equal those of the infinite graph.
    """
    t_max = int(t_max)
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if isinstance(g, Graph) and t_max >= g.radius:
        raise ContaminationError(f"t_max={t_max} is not below the ball radius {g.radius}")
    p = return_probabilities(g, 2 * t_max)
    return np.array([p[2 * t] ** (1.0 / (2 * t)) for t in range(1, t_max + 1)])


def spectral_radius_ratio(g, t_max, polynomial=1.5):
    """Ratio estimate ``sqrt(p_{2t}/p_{2t-2} * (t/(t-1))^polynomial)`` at ``t = t_max``.

    Removes the leading polynomial factor ``t^-polynomial`` of the return
    probabilities (``3/2`` on nonamenable trees); a companion to
    :func:`spectral_radius_profile`, not a replacement.
    """
    if isinstance(g, Graph) and t_max >= g.radius:
        raise ContaminationError(f"t_max={t_max} is not below the ball radius {g.radius}")
    p = return_probabilities(g, 2 * t_max)
    t = t_max
    return math.sqrt(p[2 * t] / p[2 * t - 2] * (t / (t - 1)) ** polynomial)


# ----------------------------------------------------------- entropy -----

def entropy(dist):
    """``H(mu) = sum -mu log mu`` of a :class:`DistributionVector` (float)."""
    vals = dist.as_float()
    mult = np.asarray(dist.multiplicity, dtype=float)
    pos = vals > 0
    return float(-np.sum(mult[pos] * vals[pos] * np.log(vals[pos])))


@dataclass(frozen=True)
class EntropyEstimate:
    """``exact`` is ``H(mu_t)/t`` (``None`` if not computed); ``plugin`` the
    mean of ``-log mu_hat(X_t)/t`` with ``mu_hat`` from an independent batch."""

    t: int
    exact: float | None
    plugin: float | None
    stderr: float | None
    trials: int
    undersampled: int


def entropy_estimate(obj, t, trials, seed, reference=None, exact=True):
    """Exact and plug-in estimates of ``H(mu_t)/t``.

    The plug-in estimator draws ``reference`` walks (default ``10 * trials``)
    to build ``mu_hat``, then averages ``-log mu_hat(X_t)/t`` over ``trials``
    fresh walks; endpoints never seen in the reference batch are counted in
    ``undersampled`` and left out.  On the implicit tree ``mu_hat`` is spread
    evenly over each sphere.
    """
    t = int(t)
    if t == 0:
        return EntropyEstimate(0, 0.0, 0.0, 0.0, trials, 0)
    g = obj.host if isinstance(obj, Config) else obj
    if isinstance(g, Graph):
        _check_time(g, t)
    h_exact = None
    if exact and not isinstance(obj, Config):
        h_exact = entropy(distribution_exact(obj, t)) / t
    if trials <= 0:
        return EntropyEstimate(t, h_exact, None, None, 0, 0)
    reference = 10 * trials if reference is None else int(reference)
    ref = walk_batch_endpoints(obj, t, reference, seed, STREAM_REFERENCE)
    fresh = walk_batch_endpoints(obj, t, trials, seed, STREAM_WALK)
    if isinstance(g, RegularTree):
        counts = np.bincount(ref, minlength=t + 1)
        sizes = np.array([g.sphere_size(k) for k in range(t + 1)], dtype=float)
        mu_hat = counts / (reference * sizes)
    else:
        counts = np.bincount(ref, minlength=g.vertex_count)
        mu_hat = counts / reference
    m = mu_hat[fresh]
    seen = m > 0
    vals = -np.log(m[seen]) / t
    plugin = float(vals.mean()) if seen.any() else None
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if seen.sum() > 1 else None
    return EntropyEstimate(t, h_exact, plugin, se, trials, int((~seen).sum()))


def walk_batch_endpoints(obj, t, count, seed, stream):
    """Endpoints ``X_t`` of ``count`` simple walks (distances on the implicit tree)."""
    out = np.empty(count, dtype=np.int64)
    if isinstance(obj, RegularTree):
        for i in range(count):
            _, dist = _kernels.walk_tree_moves(obj.degree, t, False, word_seed(seed, stream, i))
            out[i] = dist[-1]
        return out
    g, cfg = _as_config(obj)
    indptr, indices, eids = g.csr
    for i in range(count):
        path, n = _kernels.walk_graph(indptr, indices, eids, cfg.edges, g.boundary_mask,
                                      g.basepoint, t, False, word_seed(seed, stream, i))
        out[i] = path[n - 1]
    return out


# ------------------------------------------------ inequality checks ------

def _host_degree(g):
    """Common degree of a regular host (interior vertices of a ball); refuses otherwise."""
    if isinstance(g, RegularTree):
        return g.degree
    inner = ~g.boundary_mask
    degs = np.unique(g.degrees[inner])
    if len(degs) != 1:
        raise ValueError("host is not regular; the degree-ratio correction is not implemented")
    return int(degs[0])


def carne_check(g, t):
    """``max_v mu_t(v) - 2 exp(-dist(o, v)^2 / (2t))``; nonpositive when the bound holds."""
    _host_degree(g)
    t = int(t)
    if t < 1:
        raise ValueError("t must be >= 1")
    mu = distribution_exact(g, t)
    d = mu.distance.astype(float)
    return float(np.max(mu.as_float() - 2.0 * np.exp(-d * d / (2.0 * t))))


@dataclass(frozen=True)
class ConcavityReport:
    """Terms of the two entropy estimates, each a chain ``a <= b <= c``.

    Inner ball ``B = B_{floor(t eps)}``: ``inner_entropy`` <=
    ``inner_jensen = mu(B) log(|B|/mu(B))`` <= ``inner_rhs = log(D^{t eps}/(1-eps))``.
    Tail: ``tail_entropy`` <= ``tail_rhs = eps log(D^t/eps)``.
    ``hypothesis`` records whether ``mu(B) >= 1 - eps``, which both right-hand
    sides assume; ``ball_growth`` whether ``|B| <= D^{t eps}``.
    """

    t: int
    eps: float
    radius: int
    ball_mass: float
    ball_size: int
    inner_entropy: float
    inner_jensen: float
    inner_rhs: float
    tail_entropy: float
    tail_rhs: float
    hypothesis: bool
    ball_growth: bool
    slack: float = 1e-12

    @property
    def jensen_ok(self):
        return self.inner_entropy <= self.inner_jensen + self.slack

    @property
    def inner_ok(self):
        return self.jensen_ok and self.inner_jensen <= self.inner_rhs + self.slack

    @property
    def tail_ok(self):
        return self.tail_entropy <= self.tail_rhs + self.slack

    @property
    def ok(self):
        return self.inner_ok and self.tail_ok

    @property
    def pairs(self):
        """``(lhs, rhs)`` of every displayed inequality."""
        return ((self.inner_entropy, self.inner_jensen), (self.inner_jensen, self.inner_rhs),
                (self.tail_entropy, self.tail_rhs))


def _ball_size(g, r):
    if isinstance(g, RegularTree):
        return sum(g.sphere_size(k) for k in range(r + 1))
    return int(np.sum((g.base_distances >= 0) & (g.base_distances <= r)))


def entropy_concavity_bound(g, t, eps):
    """Evaluate the ball-splitting entropy estimates at time ``t``.

    ``D`` is the host degree.  The tail term is empty, and its bound vacuous,
    when ``eps = 1``.
    """
    D = _host_degree(g)
    t = int(t)
    eps = float(eps)
    if not 0 < eps <= 1 or t < 1:
        raise ValueError("need t >= 1 and 0 < eps <= 1")
    mu = distribution_exact(g, t)
    vals = mu.as_float()
    mult = mu.multiplicity.astype(float)
    r = math.floor(t * eps + 1e-12)
    inside = mu.distance <= r
    terms = np.where(vals > 0, -vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0) * mult
    mass = float(np.sum(vals[inside] * mult[inside]))
    size = _ball_size(g, r)
    inner_entropy = float(np.sum(terms[inside]))
    inner_jensen = mass * math.log(size / mass) if mass > 0 else 0.0
    inner_rhs = t * eps * math.log(D) - math.log(1 - eps) if eps < 1 else math.inf
    tail_entropy = float(np.sum(terms[~inside]))
    tail_rhs = eps * (t * math.log(D) - math.log(eps))
    return ConcavityReport(t, eps, r, mass, size, inner_entropy, inner_jensen, inner_rhs,
                           tail_entropy, tail_rhs, mass >= 1 - eps,
                           size <= D ** (t * eps) + 1e-9)


# --------------------------------------------------- chain audits --------

def delayed_transition_matrix(cfg, vertices=None, exact=False):
    """Transition matrix of the delayed walk restricted to ``vertices``
    (default: the basepoint's cluster), in the order given."""
    g, cfg = _as_config(cfg)
    if vertices is None:
        from percolab.percolation import clusters

        cd = clusters(cfg)
        vertices = cd.members(cd.label[g.basepoint]).tolist()
    vertices = list(vertices)
    pos = {v: i for i, v in enumerate(vertices)}
    k = len(vertices)
    one = Fraction(1) if exact else 1.0
    P = [[0 * one] * k for _ in range(k)]
    indptr, indices, eids = g.csr
    for v in vertices:
        lo, hi = indptr[v], indptr[v + 1]
        share = one / (hi - lo + 1)
        stay = share
        for j in range(lo, hi):
            w = int(indices[j])
            if cfg.edges[eids[j]]:
                if w not in pos:
                    raise ValueError("vertex set is not closed under occupied edges")
                P[pos[v]][pos[w]] += share
            else:
                stay += share
        P[pos[v]][pos[v]] += stay
    return P if exact else np.array(P, dtype=float)


def induced_transition_matrix(P, star):
    """Chain watched on the index set ``star``: ``P_SS + P_SR (I - P_RR)^-1 P_RS``.

    ``P`` is a list-of-lists of Fractions (exact) or a float array.
    """
    k = len(P)
    star = list(star)
    rest = [i for i in range(k) if i not in set(star)]
    exact = not isinstance(P, np.ndarray)
    if not exact:
        P = np.asarray(P, dtype=float)
        if not rest:
            return P[np.ix_(star, star)]
        A = np.eye(len(rest)) - P[np.ix_(rest, rest)]
        return P[np.ix_(star, star)] + P[np.ix_(star, rest)] @ np.linalg.solve(
            A, P[np.ix_(rest, star)])
    S = [[P[i][j] for j in star] for i in star]
    if not rest:
        return S
    A = [[Fraction(int(i == j)) - P[i][j] for j in rest] for i in rest]
    X = _solve_fractions(A, [[P[i][j] for j in star] for i in rest])
    return [[S[a][b] + sum(P[star[a]][r] * X[c][b] for c, r in enumerate(rest))
             for b in range(len(star))] for a in range(len(star))]


def _solve_fractions(A, B):
    """Solve ``A X = B`` over the rationals by Gauss-Jordan elimination."""
    n = len(A)
    M = [list(map(Fraction, A[i])) + list(map(Fraction, B[i])) for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [row[n:] for row in M]


def is_doubly_stochastic(P, tol=0.0):
    """Row and column sums equal to one (exactly when ``tol == 0`` on Fractions)."""
    if isinstance(P, np.ndarray):
        return bool(np.allclose(P.sum(0), 1, atol=tol or 1e-12)
                    and np.allclose(P.sum(1), 1, atol=tol or 1e-12))
    k = len(P)
    rows = all(sum(P[i]) == 1 for i in range(k))
    cols = all(sum(P[i][j] for i in range(k)) == 1 for j in range(k))
    return rows and cols
