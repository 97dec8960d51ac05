"""Bernoulli bond/site percolation, cluster decomposition and the horocyclic
counterexample percolation on a window of the 3-regular tree.

Every configuration is a pair of masks (occupied vertices, occupied edges) on
a host :class:`~percolab.graphs.Graph`.  Bond configurations occupy every
vertex; site configurations occupy the edges whose two endpoints are both
present; trimming produces *mixed* configurations where both masks matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from percolab._rng import generator, indexed_uniforms

# stream identifiers, part of the seed key so streams never collide
STREAM_BOND = 0xB0
STREAM_SITE = 0x51
STREAM_HORO = 0x40


@dataclass(frozen=True, eq=False)
class Config:
    """A percolation configuration on ``host``.

    Attributes
    ----------
    host : Graph
    mode : {"bond", "site", "mixed"}
    vertices, edges : ndarray of bool
        Occupied vertices and edges.  ``edges`` never contains an edge with an
        unoccupied endpoint.
    seed_record : tuple
        ``(seed, stream, p)`` or whatever produced the configuration.
    """

    host: Any
    mode: str
    vertices: np.ndarray
    edges: np.ndarray
    seed_record: tuple = ()
    info: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        g = self.host
        if self.mode not in ("bond", "site", "mixed"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.vertices.shape != (g.vertex_count,) or self.edges.shape != (g.edge_count,):
            raise ValueError("mask length does not match the host")
        self.vertices.setflags(write=False)
        self.edges.setflags(write=False)

    @classmethod
    def bond(cls, host, edge_mask, seed_record=(), info=None):
        v = np.ones(host.vertex_count, dtype=bool)
        return cls(host, "bond", v, np.asarray(edge_mask, dtype=bool).copy(), seed_record,
                   dict(info or {}))

    @classmethod
    def site(cls, host, vertex_mask, seed_record=()):
        v = np.asarray(vertex_mask, dtype=bool).copy()
        e = host.edges
        return cls(host, "site", v, v[e[:, 0]] & v[e[:, 1]], seed_record)

    @classmethod
    def mixed(cls, host, vertex_mask, edge_mask, seed_record=()):
        v = np.asarray(vertex_mask, dtype=bool).copy()
        e = host.edges
        em = np.asarray(edge_mask, dtype=bool) & v[e[:, 0]] & v[e[:, 1]]
        return cls(host, "mixed", v, em, seed_record)

    @classmethod
    def full(cls, host):
        return cls.bond(host, np.ones(host.edge_count, dtype=bool), ("full",))

    @property
    def mask(self):
        """The defining bitmask: edges for bond mode, vertices for site mode."""
        return self.vertices if self.mode == "site" else self.edges

    def occupied_count(self):
        return int(self.vertices.sum())

    def degrees(self):
        """Degree of every vertex in the occupied edge set."""
        e = self.host.edges[self.edges]
        return np.bincount(e.ravel(), minlength=self.host.vertex_count)

    def adjacency(self):
        """Adjacency lists of the occupied subgraph (unoccupied vertices get ``()``)."""
        g = self.host
        indptr, indices, eids = g.csr
        on = self.edges
        out = []
        for v in range(g.vertex_count):
            sl = slice(indptr[v], indptr[v + 1])
            out.append(tuple(indices[sl][on[eids[sl]]].tolist()) if self.vertices[v] else ())
        return out

    def without_vertices(self, removed):
        """Copy with the vertices in boolean mask ``removed`` (and their edges) deleted."""
        return Config.mixed(self.host, self.vertices & ~removed, self.edges, self.seed_record)

    def is_subconfig_of(self, other):
        return bool(np.all(~self.vertices | other.vertices) and np.all(~self.edges | other.edges))

    def to_text(self):
        """``mode <m>`` followed by hex bitmask lines (``vertices``/``edges``)."""
        lines = [f"mode {self.mode}"]
        if self.mode in ("site", "mixed"):
            lines.append("vertices " + _hex(self.vertices))
        if self.mode in ("bond", "mixed"):
            lines.append("edges " + _hex(self.edges))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, host, text):
        fields = dict(line.split(None, 1) for line in text.strip().splitlines())
        mode = fields.get("mode", "").strip()
        if mode == "bond":
            return cls.bond(host, _unhex(fields["edges"], host.edge_count))
        if mode == "site":
            return cls.site(host, _unhex(fields["vertices"], host.vertex_count))
        if mode == "mixed":
            return cls.mixed(host, _unhex(fields["vertices"], host.vertex_count),
                             _unhex(fields["edges"], host.edge_count))
        raise ValueError(f"unknown mode {mode!r}")

    def __eq__(self, other):
        return (isinstance(other, Config) and other.host is self.host
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.edges, other.edges))

    __hash__ = None

    def __repr__(self):
        return (f"Config({self.mode}, host={self.host.family_tag!r}, "
                f"vertices={self.occupied_count()}, edges={int(self.edges.sum())})")


def _hex(mask):
    # bit i of the integer is mask[i]; written big-endian hex
    bits = np.packbits(np.asarray(mask, dtype=np.uint8), bitorder="little")
    return int.from_bytes(bits.tobytes(), "little").to_bytes(len(bits), "big").hex() or "0"


def _unhex(text, length):
    value = int(text.strip(), 16)
    return np.array([(value >> i) & 1 for i in range(length)], dtype=bool)


def _check_p(p):
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def sample_bond(g, p, seed, trial=0):
    """Bernoulli(``p``) bond percolation.

    Edge ``i`` is open iff ``u_i < p`` with ``u_i`` a function of
    ``(seed, trial, i)`` only, so samples at different ``p`` are coupled
    monotonically.
    """
    p = _check_p(p)
    u = indexed_uniforms(seed, g.edge_count, STREAM_BOND, trial)
    return Config.bond(g, u < p, (int(seed), trial, p))


def sample_site(g, p, seed, trial=0):
    """Bernoulli(``p``) site percolation, coupled across ``p`` like :func:`sample_bond`."""
    p = _check_p(p)
    u = indexed_uniforms(seed, g.vertex_count, STREAM_SITE, trial)
    return Config.site(g, u < p, (int(seed), trial, p))


@dataclass(frozen=True)
class ClusterDecomposition:
    """Components of the occupied subgraph.

    ``label[v] == -1`` for unoccupied vertices.  ``cluster_edge_boundary[k]``
    counts host edges with exactly one endpoint in cluster ``k``.
    """

    label: np.ndarray
    sizes: np.ndarray
    touches_boundary: np.ndarray
    cluster_edge_boundary: np.ndarray

    @property
    def count(self):
        return len(self.sizes)

    def members(self, k):
        return np.flatnonzero(self.label == k)

    def cluster_of(self, v):
        return int(self.label[v])


def clusters(c):
    """Decompose ``c`` into clusters (components of the occupied subgraph)."""
    g = c.host
    n = g.vertex_count
    e = g.edges[c.edges]
    adj = coo_matrix((np.ones(len(e), dtype=np.int8), (e[:, 0], e[:, 1])), shape=(n, n))
    _, raw = connected_components(adj, directed=False)
    occ = c.vertices
    # relabel occupied components 0..k-1 in order of their smallest vertex
    first, inverse = np.unique(raw[occ], return_inverse=True)
    label = np.full(n, -1, dtype=np.int64)
    label[occ] = inverse
    k = len(first)
    sizes = np.bincount(inverse, minlength=k)
    touches = np.zeros(k, dtype=bool)
    bnd = g.boundary_mask & occ
    touches[label[bnd]] = True
    he = g.edges
    la, lb = label[he[:, 0]], label[he[:, 1]]
    cut = la != lb
    leaving = np.zeros(k, dtype=np.int64)
    np.add.at(leaving, la[cut & (la >= 0)], 1)
    np.add.at(leaving, lb[cut & (lb >= 0)], 1)
    return ClusterDecomposition(label, sizes, touches, leaving)


def reaches_boundary(c, v=None):
    """Whether the cluster of ``v`` (default: basepoint) meets the boundary."""
    v = c.host.basepoint if v is None else v
    if not c.vertices[v]:
        return False
    if v in c.host.boundary:
        return True
    adj_on = _on_neighbors(c)
    seen = {v}
    stack = [v]
    bnd = c.host.boundary
    while stack:
        u = stack.pop()
        for w in adj_on(u):
            if w not in seen:
                if w in bnd:
                    return True
                seen.add(w)
                stack.append(w)
    return False


def _on_neighbors(c):
    indptr, indices, eids = c.host.csr
    on = c.edges

    def nb(u):
        sl = slice(indptr[u], indptr[u + 1])
        return indices[sl][on[eids[sl]]].tolist()

    return nb


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo proportion with a normal-approximation interval."""

    value: float
    stderr: float
    trials: int
    z: float = 3.0

    @property
    def ci(self):
        return (self.value - self.z * self.stderr, self.value + self.z * self.stderr)


def proportion(successes, trials, z=3.0):
    p = successes / trials
    return Estimate(p, math.sqrt(p * (1 - p) / trials), trials, z)


def boundary_reach_probability(g, p, trials, seed, mode="bond"):
    """Fraction of trials whose basepoint cluster touches the boundary.

    Trial ``i`` uses stream ``(seed, i)``; the estimate carries a 3-sigma
    binomial interval.
    """
    if not g.boundary:
        raise ValueError("boundary_reach_probability needs a graph with a boundary")
    sampler = sample_bond if mode == "bond" else sample_site
    hits = sum(reaches_boundary(sampler(g, p, seed, trial=i)) for i in range(trials))
    return proportion(hits, trials)


TRIAL_FIELDS = ("trial", "seed", "p", "cluster_count", "max_cluster", "reach_boundary")


def trial_records(g, p, trials, seed, mode="bond"):
    """One CSV-ready record per trial (see ``TRIAL_FIELDS``)."""
    sampler = sample_bond if mode == "bond" else sample_site
    rows = []
    for i in range(trials):
        c = sampler(g, p, seed, trial=i)
        cd = clusters(c)
        o = g.basepoint
        reach = bool(c.vertices[o] and cd.touches_boundary[cd.label[o]])
        rows.append((i, int(seed), p, cd.count, int(cd.sizes.max()) if cd.count else 0,
                     int(reach)))
    return rows


# ------------------------------------------------------- horocyclic ------

def horocyclic_percolation(h, p0, seed):
    """Level-coupled percolation ``eta`` plus one downward edge per finite component.

    For each level ``n`` one coin decides all edges between ``H_n`` and
    ``H_{n+1}``.  Every ``eta``-component ``K`` that avoids the window
    boundary gets one edge chosen uniformly among those joining its deepest
    level ``n(K)`` to ``n(K)+1``.  Returns a bond :class:`Config` on
    ``h.underlying``; ``info`` holds the ``eta`` and ``eta_prime`` masks,
    the level coins and the audited interior components.
    """
    p0 = float(p0)
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    g = h.underlying
    depth = h.depth
    lo = int(h.level.min())
    coins = generator(seed, STREAM_HORO, 0).random(depth - lo) < p0
    # edge (parent, child): the child's level n + 1 selects coin n
    child = g.edges[:, 1]  # parent index < child index in heap order
    child_level = h.level[child]
    eta = coins[child_level - 1 - lo]
    eta_cfg = Config.bond(g, eta)
    cd = clusters(eta_cfg)
    picks = indexed_uniforms(seed, g.vertex_count, STREAM_HORO, 1)
    eta_prime = np.zeros(g.edge_count, dtype=bool)
    interior = []
    for k in range(cd.count):
        if cd.touches_boundary[k]:
            continue
        members = cd.members(k)
        deepest = int(h.level[members].max())
        bottom = members[h.level[members] == deepest]
        candidates = [g.edge_id(int(v), int(w)) for v in bottom for w in h.children(int(v))]
        top = int(members[0])  # the unique shallowest vertex, smallest in heap order
        chosen = candidates[int(picks[top] * len(candidates))]
        eta_prime[chosen] = True
        interior.append((top, deepest, chosen))
    omega = eta | eta_prime
    info = {"eta": eta, "eta_prime": eta_prime, "coins": coins,
            "interior_components": tuple(interior)}
    return Config.bond(g, omega, (int(seed), STREAM_HORO, p0), info)


def horocyclic_audit(h, cfg):
    """Exact checks on a horocyclic sample.

    Returns a dict with the number of interior ``eta``-components, the number
    of ``eta'`` edges, per-component ``eta'`` counts, and the number of
    interior ``omega``-components that contain a cycle.
    """
    g = h.underlying
    eta = cfg.info["eta"]
    eta_prime = cfg.info["eta_prime"]
    cd_eta = clusters(Config.bond(g, eta))
    per_component = {}
    for eid in np.flatnonzero(eta_prime).tolist():
        u, v = g.edges[eid]
        upper = u if h.level[u] < h.level[v] else v
        k = int(cd_eta.label[upper])
        per_component[k] = per_component.get(k, 0) + 1
    interior = [k for k in range(cd_eta.count) if not cd_eta.touches_boundary[k]]
    counts = [per_component.get(k, 0) for k in interior]
    stray = sum(c for k, c in per_component.items() if cd_eta.touches_boundary[k])
    cd = clusters(cfg)
    e = g.edges[cfg.edges]
    edges_per = np.bincount(cd.label[e[:, 0]], minlength=cd.count)
    cyclic = int(np.sum((edges_per != cd.sizes - 1) & ~cd.touches_boundary))
    return {"interior_eta_components": len(interior),
            "eta_prime_edges": int(eta_prime.sum()),
            "per_component_counts": counts,
            "eta_prime_on_boundary_components": stray,
            "cyclic_interior_components": cyclic}
