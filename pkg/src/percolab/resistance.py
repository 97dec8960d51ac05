"""Effective resistance with unit conductances, and transience profiles.

Small networks are reduced exactly by star-mesh elimination over
:class:`fractions.Fraction`; larger ones go through a sparse direct solve of
the grounded Laplacian, refined by conjugate gradients if the residual is not
below ``1e-10``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg, spsolve

from percolab.graphs import Graph
from percolab.percolation import Config, sample_bond

EXACT_LIMIT = 1000
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ResistanceResult:
    value: float | Fraction
    source: int
    sink_set: tuple
    residual_norm: float
    method: str


def _network(obj):
    """``(n, edge array)`` of the conducting edges of a Graph or Config."""
    if isinstance(obj, Config):
        return obj.host.vertex_count, obj.host.edges[obj.edges], obj.vertices
    if isinstance(obj, Graph):
        return obj.vertex_count, obj.edges, np.ones(obj.vertex_count, dtype=bool)
    raise TypeError(f"expected a Graph or Config, got {type(obj).__name__}")


def _reach(n, edges, source):
    adj = sparse.coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    from scipy.sparse.csgraph import breadth_first_order

    order = breadth_first_order(adj, source, directed=False, return_predecessors=False)
    seen = np.zeros(n, dtype=bool)
    seen[order] = True
    return seen


def _reach_glued(n, edges, source, glued):
    extra = np.array([(glued[0], g) for g in glued[1:]], dtype=np.int64).reshape(-1, 2)
    return _reach(n, np.concatenate([edges, extra]), source)


def _collapse(n, edges, source, sinks, seen, identify=()):
    """Relabel the source's component with all sinks merged into node 0
    (ground), the source at node 1 and the ``identify`` set merged into one
    further node; returns ``(k, a, b)``, the node count and edge endpoints."""
    label = np.full(n, -1, dtype=np.int64)
    is_sink = np.zeros(n, dtype=bool)
    is_sink[list(sinks)] = True
    label[is_sink & seen] = 0
    label[source] = 1
    glued = np.zeros(n, dtype=bool)
    glued[list(identify)] = True
    glued &= seen & ~is_sink
    glued[source] = False
    rest = np.flatnonzero(seen & ~is_sink & ~glued)
    rest = rest[rest != source]
    label[rest] = np.arange(2, 2 + len(rest))
    if glued.any():
        label[glued] = 2 + len(rest)
        rest = np.append(rest, -1)
    a, b = label[edges[:, 0]], label[edges[:, 1]]
    keep = (a >= 0) & (b >= 0) & (a != b)
    return 2 + len(rest), a[keep], b[keep]


def _exact(k, a, b):
    """Star-mesh elimination of nodes 2..k-1; returns R between nodes 1 and 0."""
    w = [dict() for _ in range(k)]
    for x, y in zip(a.tolist(), b.tolist()):
        w[x][y] = w[x].get(y, 0) + 1
        w[y][x] = w[y].get(x, 0) + 1
    alive = [True] * k
    heap = [(len(w[v]), v) for v in range(2, k)]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if not alive[v] or d != len(w[v]):
            continue
        alive[v] = False
        nb = list(w[v].items())
        total = sum(c for _, c in nb)
        for x, _ in nb:
            del w[x][v]
        for i, (x, cx) in enumerate(nb):
            for y, cy in nb[i + 1:]:
                c = Fraction(cx * cy) / total
                w[x][y] = w[x].get(y, 0) + c
                w[y][x] = w[y].get(x, 0) + c
        for x, _ in nb:
            if x >= 2:
                heapq.heappush(heap, (len(w[x]), x))
        w[v] = {}
    c = w[1].get(0, 0)
    if c == 0:
        raise ValueError("source and sink set are disconnected")
    return 1 / Fraction(c)


def _numeric(k, a, b):
    rows = np.concatenate([a, b])
    cols = np.concatenate([b, a])
    W = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(k, k)).tocsr()
    L = sparse.diags(np.asarray(W.sum(axis=1)).ravel()) - W
    Lr = L[1:, 1:].tocsc()
    rhs = np.zeros(k - 1)
    rhs[0] = 1.0
    x = spsolve(Lr, rhs)
    res = float(np.linalg.norm(Lr @ x - rhs))
    method = "sparse-direct"
    if not np.all(np.isfinite(x)) or res > RESIDUAL_TOL:
        x, info = cg(Lr, rhs, x0=np.nan_to_num(x), rtol=1e-14, maxiter=100 * k)
        res = float(np.linalg.norm(Lr @ x - rhs))
        method = "conjugate-gradient"
        if info != 0 or res > RESIDUAL_TOL:
            raise RuntimeError(f"resistance solve did not converge (residual {res:.3g})")
    return float(x[0]), res, method


def effective_resistance(obj, source, sink_set, exact=None, identify=()):
    """Resistance between ``source`` and the grounded ``sink_set``.

    ``obj`` is a :class:`Graph` or a :class:`Config` (only occupied edges
    conduct).  Vertices in ``identify`` are shorted together first (wired
    boundary); if the source or a sink lies in that set, the whole set joins
    it.  ``exact`` defaults to rational elimination when at most
    ``EXACT_LIMIT`` vertices take part; the value is then a ``Fraction``.
    """
    n, edges, occupied = _network(obj)
    identify = set(int(v) for v in identify)
    sinks = set(int(s) for s in sink_set)
    source = int(source)
    if identify and (sinks & identify):
        sinks |= identify
        identify = set()
    if source in identify:
        # shorting the source set: route it through a grounded-complement trick
        # by swapping roles (resistance is symmetric)
        if len(sinks) != 1:
            raise ValueError("cannot short the source set against several sinks")
        source, sinks = sinks.pop(), identify
        identify = set()
    sinks = sorted(sinks)
    if not sinks:
        raise ValueError("sink set is empty")
    if source in sinks:
        return ResistanceResult(Fraction(0) if exact else 0.0, source, tuple(sinks), 0.0,
                                "trivial")
    if not occupied[source]:
        raise ValueError("source is not occupied")
    if identify:
        # shorting can connect pieces, so reach through the glued set too
        seen = _reach_glued(n, edges, source, sorted(identify))
    else:
        seen = _reach(n, edges, source)
    if not seen[sinks].any():
        raise ValueError("source and sink set are disconnected")
    k, a, b = _collapse(n, edges, source, sinks, seen, identify)
    if exact is None:
        exact = k <= EXACT_LIMIT
    if exact:
        return ResistanceResult(_exact(k, a, b), source, tuple(sinks), 0.0, "elimination")
    value, res, method = _numeric(k, a, b)
    return ResistanceResult(value, source, tuple(sinks), res, method)


@dataclass(frozen=True)
class TransienceRow:
    radius: int
    resistance: float
    stderr: float
    samples: int
    discarded: int


def transience_profile(family, radii, p=None, trials=1, seed=None, retry_cap=1000,
                       exact=None):
    """``R_eff(o, boundary of B_r)`` for each radius.

    Without ``p`` the host ball is used.  With ``p`` the value is averaged
    over ``trials`` bond-percolation samples whose basepoint cluster reaches
    the boundary; other samples are discarded and counted.
    """
    from percolab.graphs import parse_family

    if isinstance(family, str):
        family = parse_family(family)
    radii = [int(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    rows = []
    for r in radii:
        g = family(r)
        if p is None:
            res = effective_resistance(g, g.basepoint, g.boundary, exact=exact)
            rows.append(TransienceRow(r, res.value, 0.0, 1, 0))
            continue
        if seed is None:
            raise ValueError("a seed is required for percolation profiles")
        values = []
        discarded = 0
        trial = 0
        while len(values) < trials:
            if discarded > retry_cap:
                raise RuntimeError(f"no boundary-reaching sample within {retry_cap} retries")
            cfg = sample_bond(g, p, seed, trial=r * 1_000_003 + trial)
            trial += 1
            try:
                res = effective_resistance(cfg, g.basepoint, g.boundary, exact=False)
            except ValueError:
                discarded += 1
                continue
            values.append(float(res.value))
        v = np.array(values)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        rows.append(TransienceRow(r, float(v.mean()), se, len(v), discarded))
    return rows


def fit_log(radii, values):
    """Least-squares fit ``R = a + c log r``; returns ``(a, c, r_squared)``."""
    x = np.log(np.asarray(radii, dtype=float))
    y = np.asarray(values, dtype=float)
    A = np.stack([np.ones_like(x), x], axis=1)
    (a, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    fitted = A @ np.array([a, c])
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(a), float(c), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
