"""Iterative trimming of small-boundary pieces from a percolation configuration.

One sweep draws a fair site sample ``beta``; every component ``K`` of
``beta`` restricted to the current configuration that avoids the boundary
frontier and has fewer than ``h |K|`` configuration edges leaving it is
deleted (vertices and incident edges).  Repeating this drives the isoperimetric
constant of what survives up to ``h``.

The module also audits the mass-transport bookkeeping behind the density
estimate for the survivors, in exact rational arithmetic.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from percolab._rng import indexed_uniforms
from percolab.expansion import alpha_K, alpha_sup, min_ratio_in_subgraph
from percolab.percolation import Config

STREAM_BETA = 0xBE7A
DEFAULT_PATIENCE = 32


def as_fraction(h):
    """Exact rational from an int, Fraction, decimal string or float (via its repr)."""
    if isinstance(h, Fraction):
        return h
    if isinstance(h, float):
        return Fraction(repr(h))
    return Fraction(h)


def _check_h(h):
    h = as_fraction(h)
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    return h


def _components(host, vmask, emask):
    """Component labels of the occupied subgraph (-1 off the vertex mask)."""
    n = host.vertex_count
    e = host.edges[emask]
    adj = coo_matrix((np.ones(len(e), dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
    _, raw = connected_components(adj, directed=False)
    label = np.full(n, -1, dtype=np.int64)
    _, label[vmask] = np.unique(raw[vmask], return_inverse=True)
    return label


@dataclass(frozen=True)
class Removal:
    """One deleted component: its vertices and exact ``|boundary| / |K|``."""

    vertices: tuple
    boundary: int

    @property
    def ratio(self):
        return Fraction(self.boundary, len(self.vertices))


@dataclass(frozen=True)
class SweepRecord:
    """State *before* sweep ``n`` and what the sweep removed.

    ``theta`` is the fraction of host vertices still occupied, ``theta_o`` the
    indicator at the basepoint and ``D`` the mean occupied degree over all host
    vertices (all exact).
    """

    n: int
    theta: Fraction
    theta_o: int
    D: Fraction
    removals: tuple

    @property
    def removed(self):
        return tuple(sorted(v for r in self.removals for v in r.vertices))

    @property
    def max_witness_ratio(self):
        return max((r.ratio for r in self.removals), default=None)


def trim_step(cfg, h, seed, sweep=0):
    """One sweep: returns ``(next_config, removals)``.

    ``beta`` for sweep ``n`` is keyed by ``(seed, n)``.
    """
    h = _check_h(h)
    g = cfg.host
    beta = indexed_uniforms(seed, g.vertex_count, STREAM_BETA, sweep) < 0.5
    vmask = cfg.vertices & beta
    e = g.edges
    emask = cfg.edges & vmask[e[:, 0]] & vmask[e[:, 1]]
    label = _components(g, vmask, emask)
    k = int(label.max()) + 1
    if k == 0:
        return cfg, ()
    sizes = np.bincount(label[vmask], minlength=k)
    touches = np.zeros(k, dtype=bool)
    touches[label[g.boundary_mask & vmask]] = True
    # configuration edges with exactly one endpoint in a component
    oe = e[cfg.edges]
    la, lb = label[oe[:, 0]], label[oe[:, 1]]
    cut = la != lb
    leaving = np.zeros(k, dtype=np.int64)
    np.add.at(leaving, la[cut & (la >= 0)], 1)
    np.add.at(leaving, lb[cut & (lb >= 0)], 1)
    # |boundary| < h |K|  <=>  |boundary| * den < num * |K|
    remove = ~touches & (leaving * h.denominator < h.numerator * sizes)
    if not remove.any():
        return cfg, ()
    gone = np.zeros(g.vertex_count, dtype=bool)
    gone[vmask] = remove[label[vmask]]
    order = np.argsort(label, kind="stable")
    removals = []
    starts = np.searchsorted(label[order], np.arange(k + 1))
    for c in np.flatnonzero(remove).tolist():
        members = order[starts[c]:starts[c + 1]]
        removals.append(Removal(tuple(sorted(members.tolist())), int(leaving[c])))
    removals.sort(key=lambda r: r.vertices[0])
    return cfg.without_vertices(gone), tuple(removals)


def _interior_occupied(cfg):
    return bool(np.any(cfg.vertices & ~cfg.host.boundary_mask))


def _snapshot(cfg, n, removals=()):
    g = cfg.host
    N = g.vertex_count
    deg = cfg.degrees()
    return SweepRecord(n, Fraction(int(cfg.vertices.sum()), N), int(cfg.vertices[g.basepoint]),
                       Fraction(int(deg.sum()), N), tuple(removals))


def default_max_sweeps(g):
    return max(1, math.ceil(10 * math.log2(max(g.vertex_count, 2))))


@dataclass(frozen=True, eq=False)
class TrimTrace:
    """History of a trimming run.

    ``iterations[n]`` describes the configuration entering sweep ``n``; the
    final record (no removals) describes ``final``.  ``converged`` means
    ``patience`` consecutive sweeps removed nothing (or no interior vertex is
    left); ``sweeps`` counts the sweeps performed.
    """

    h: Fraction
    seed: int
    initial: Config
    iterations: tuple
    final: Config
    converged: bool
    sweeps: int
    patience: int
    meta: dict = field(default_factory=dict)

    @property
    def removals(self):
        return tuple(r for it in self.iterations for r in it.removals)

    def configs(self):
        """Yield ``omega_0, omega_1, ...`` by replaying the recorded removals."""
        cfg = self.initial
        yield cfg
        for it in self.iterations[:-1]:
            gone = np.zeros(cfg.host.vertex_count, dtype=bool)
            gone[list(it.removed)] = True
            cfg = cfg.without_vertices(gone)
            yield cfg

    def rows(self):
        """CSV rows ``sweep, removed_count, theta_n, D_n, max_witness_ratio``."""
        out = []
        for it in self.iterations:
            r = it.max_witness_ratio
            out.append((it.n, len(it.removed), float(it.theta), float(it.D),
                        "" if r is None else float(r)))
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("sweep", "removed_count", "theta_n", "D_n", "max_witness_ratio"))
        for row in self.rows():
            w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in row])
        return buf.getvalue()


def trim(cfg, h, seed, max_sweeps=None, patience=DEFAULT_PATIENCE):
    """Run sweeps until ``patience`` consecutive ones remove nothing.

    Non-convergence within ``max_sweeps`` (default ``ceil(10 log2 |V|)``) is
    reported through ``converged=False``, never raised.
    """
    h = _check_h(h)
    g = cfg.host
    max_sweeps = default_max_sweeps(g) if max_sweeps is None else int(max_sweeps)
    patience = max(1, min(int(patience), max_sweeps))
    records = []
    quiet = 0
    converged = False
    n = 0
    cur = cfg
    while True:
        if not _interior_occupied(cur) or quiet >= patience:
            converged = True
            break
        if n >= max_sweeps:
            break
        nxt, removals = trim_step(cur, h, seed, n)
        records.append(_snapshot(cur, n, removals))
        quiet = 0 if removals else quiet + 1
        cur = nxt
        n += 1
    records.append(_snapshot(cur, n))
    return TrimTrace(h, int(seed), cfg, tuple(records), cur, converged, n, patience)


# ------------------------------------------------------------ audits -----

@dataclass(frozen=True)
class IsoperimetryReport:
    ok: bool
    min_ratio: Fraction | None
    witness: tuple
    cap: int
    converged: bool


def verify_isoperimetry(trace, cap=12):
    """Search connected interior ``W`` inside the survivors, ``|W| <= cap``, for
    ``|boundary_{E(omega')} W| / |W| < h``.

    ``ok`` is true when no such ``W`` exists; ``min_ratio`` is the smallest
    ratio seen (``None`` when the survivors have no interior vertex).
    """
    final = trace.final
    allowed = (final.vertices & ~final.host.boundary_mask).tolist()
    if not any(allowed):
        return IsoperimetryReport(True, None, (), cap, trace.converged)
    ratio, witness = min_ratio_in_subgraph(final.adjacency(), allowed, cap)
    return IsoperimetryReport(ratio >= trace.h, ratio, witness, cap, trace.converged)


def density_lower_bound(deg_G, E_deg_given_in, P_in, iso, h):
    """``P_in * (1 - (deg_G - E_deg_given_in) / (iso - 2h))``; may be negative."""
    gap = iso - 2 * h
    if gap <= 0:
        raise ValueError("iso - 2h must be positive")
    if E_deg_given_in > deg_G:
        raise ValueError("conditional expected degree cannot exceed the host degree")
    return P_in * (1 - (deg_G - E_deg_given_in) / gap)


def surviving_interior_fraction(cfg):
    g = cfg.host
    inner = ~g.boundary_mask
    return float(cfg.vertices[inner].sum()) / float(inner.sum())


@dataclass(frozen=True)
class SweepAudit:
    n: int
    sent_total: Fraction
    received_total: Fraction
    decrement: Fraction  # D_n - D_{n+1}
    theta_drop: Fraction  # theta_n - theta_{n+1}
    bound: Fraction  # (alpha + 2h) * theta_drop
    max_received: Fraction
    sent_identity: bool  # sum_v m(o, v) == deg_n(o) - deg_{n+1}(o) for every o
    received_identity: bool  # sum_v m(v, o) == 2 |edges at K(o)| / |K(o)| for every o
    received_strict: bool  # sum_v m(v, o) < alpha_K + 2h for every o in gamma_n
    received_below_alpha: bool  # sum_v m(v, o) < alpha + 2h for every o in gamma_n

    @property
    def conserved(self):
        return self.sent_total == self.received_total

    @property
    def decrement_ok(self):
        return self.decrement <= self.bound


@dataclass(frozen=True)
class MassTransportAudit:
    alpha: Fraction
    alpha_source: str
    h: Fraction
    sweeps: tuple
    trace: TrimTrace

    @property
    def conserved(self):
        return all(s.conserved for s in self.sweeps)

    @property
    def decrement_ok(self):
        return all(s.decrement_ok for s in self.sweeps)

    @property
    def identities_ok(self):
        return all(s.sent_identity and s.received_identity and s.received_strict
                   for s in self.sweeps)

    @property
    def ok(self):
        return (self.conserved and self.decrement_ok and self.identities_ok
                and all(s.received_below_alpha for s in self.sweeps))


def _audit_sweep(cfg, removals, h, alpha, n, forest):
    g = cfg.host
    N = g.vertex_count
    deg = cfg.degrees().tolist()
    on_nb = cfg.adjacency()
    sent = {}
    received = {}
    comp_of = {}
    for r in removals:
        for v in r.vertices:
            comp_of[v] = r
    for r in removals:
        K = r.vertices
        Kset = set(K)
        size = len(K)
        # m(v, u) for u in K: deg(v)/|K| inside K, edge count/|K| outside
        outside = {}
        for x in K:
            for y in on_nb[x]:
                if y not in Kset:
                    outside[y] = outside.get(y, 0) + 1
        for u in K:
            for v in K:
                m = Fraction(deg[v], size)
                sent[v] = sent.get(v, 0) + m
                received[u] = received.get(u, 0) + m
            for v, c in outside.items():
                m = Fraction(c, size)
                sent[v] = sent.get(v, 0) + m
                received[u] = received.get(u, 0) + m
    gone = np.zeros(N, dtype=bool)
    gone[list(comp_of)] = True
    nxt = cfg.without_vertices(gone)
    deg_next = nxt.degrees().tolist()
    sent_identity = all(sent.get(v, 0) == deg[v] - deg_next[v] for v in range(N))
    received_identity = True
    strict = True
    below = True
    max_recv = Fraction(0)
    for r in removals:
        K = r.vertices
        Kset = set(K)
        inside = sum(1 for x in K for y in on_nb[x] if y in Kset) // 2
        expect = Fraction(2 * (inside + r.boundary), len(K))
        # induced density of K in the graph the constant refers to
        aK = alpha_K(g, K) if not forest else Fraction(2 * inside, len(K))
        for u in K:
            got = received.get(u, 0)
            received_identity &= got == expect
            strict &= got < aK + 2 * h
            below &= got < alpha + 2 * h
            max_recv = max(max_recv, got)
    received_identity &= all(v in comp_of for v in received)
    theta_drop = Fraction(len(comp_of), N)
    decrement = Fraction(sum(deg) - sum(deg_next), N)
    return SweepAudit(n, sum(sent.values(), Fraction(0)), sum(received.values(), Fraction(0)),
                      decrement, theta_drop, (alpha + 2 * h) * theta_drop, max_recv,
                      sent_identity, received_identity, strict, below)


def audit_trace(trace, alpha, alpha_source="given", forest=False):
    """Exact mass-transport audit of every sweep of ``trace`` against ``alpha``."""
    alpha = as_fraction(alpha)
    sweeps = []
    for cfg, it in zip(trace.configs(), trace.iterations):
        sweeps.append(_audit_sweep(cfg, it.removals, trace.h, alpha, it.n, forest))
    return MassTransportAudit(alpha, alpha_source, trace.h, tuple(sweeps), trace)


def mass_transport_audit(host, cfg, h, seed, cap=12, alpha=None, max_sweeps=None,
                         patience=DEFAULT_PATIENCE):
    """Trim ``cfg`` and audit the transport of degree mass at every sweep.

    The host must be finite, vertex-transitive by construction and free of
    boundary.  ``alpha`` defaults to the largest average induced degree over
    connected sets of at most ``cap`` vertices.
    """
    if host.boundary:
        raise ValueError("mass_transport_audit needs a host without boundary")
    if not host.meta.get("transitive"):
        raise ValueError("mass_transport_audit needs a vertex-transitive host")
    if cfg.host is not host:
        raise ValueError("configuration lives on a different host")
    if alpha is None:
        alpha, source = alpha_sup(host, cap), f"enumerated, cap {cap}"
    else:
        source = "given"
    trace = trim(cfg, h, seed, max_sweeps=max_sweeps, patience=patience)
    return audit_trace(trace, alpha, source)


def is_forest_config(cfg):
    """True when the occupied edges contain no cycle."""
    from percolab.percolation import clusters

    cd = clusters(cfg)
    e = cfg.host.edges[cfg.edges]
    per = np.bincount(cd.label[e[:, 0]], minlength=cd.count)
    return bool(np.all(per == cd.sizes - 1))


def forest_audit(cfg, h, seed, max_sweeps=None, patience=DEFAULT_PATIENCE):
    """Mass-transport audit of a forest configuration with the constant 2.

    Every finite piece of a forest has average degree below 2, so each removed
    component receives less than ``2 + 2h``.  Works on any host.
    """
    if not is_forest_config(cfg):
        raise ValueError("forest_audit needs a configuration without cycles")
    trace = trim(cfg, h, seed, max_sweeps=max_sweeps, patience=patience)
    return audit_trace(trace, 2, "forest constant", forest=True)
