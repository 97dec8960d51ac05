"""Finite exhaustions of the graph families used throughout the package.

A :class:`Graph` is an immutable simple graph with a basepoint ``o`` and a
marked boundary frontier.  The frontier stands in for "infinity": anything that
touches it is treated as infinite by the percolation, trimming and forest code.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Mapping

import numpy as np

from percolab._rng import generator

DEFAULT_MAX_VERTICES = 2_000_000


class GraphSizeError(ValueError):
    """Raised when a generator would exceed the configured vertex cap."""


class GraphSpecError(ValueError):
    """Malformed graph DSL string; ``column`` is 1-based."""

    def __init__(self, message, spec="", column=None):
        self.spec = spec
        self.column = column
        where = f" (column {column})" if column is not None else ""
        super().__init__(f"{message}{where}: {spec!r}")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable finite simple graph with basepoint and boundary frontier.

    Use :meth:`from_edges` rather than the raw constructor; it sorts and
    validates everything.
    """

    vertex_count: int
    adjacency: tuple
    edges: np.ndarray
    basepoint: int
    boundary: frozenset
    degree_bound: int
    family_tag: str
    meta: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, n, edge_pairs, basepoint=0, boundary=(), family_tag="custom",
                   degree_bound=None, meta=None, max_vertices=DEFAULT_MAX_VERTICES):
        n = int(n)
        if n < 1:
            raise ValueError("a graph needs at least one vertex")
        if n > max_vertices:
            raise GraphSizeError(f"{n} vertices exceeds cap {max_vertices}")
        arr = np.asarray(list(edge_pairs) if not isinstance(edge_pairs, np.ndarray) else edge_pairs,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        arr = arr[order]
        if len(arr) > 1 and np.any(np.all(arr[1:] == arr[:-1], axis=1)):
            raise ValueError("parallel edges are not allowed")
        nbrs = [[] for _ in range(n)]
        for u, v in arr.tolist():
            nbrs[u].append(v)
            nbrs[v].append(u)
        adjacency = tuple(tuple(sorted(a)) for a in nbrs)
        max_deg = max((len(a) for a in adjacency), default=0)
        if degree_bound is None:
            degree_bound = max_deg
        elif max_deg > degree_bound:
            raise ValueError(f"degree {max_deg} exceeds degree bound {degree_bound}")
        basepoint = int(basepoint)
        if not 0 <= basepoint < n:
            raise ValueError("basepoint out of range")
        boundary = frozenset(int(b) for b in boundary)
        if any(not 0 <= b < n for b in boundary):
            raise ValueError("boundary vertex out of range")
        arr.setflags(write=False)
        return cls(n, adjacency, arr, basepoint, boundary, int(degree_bound), family_tag,
                   dict(meta or {}))

    @property
    def edge_count(self):
        return len(self.edges)

    @cached_property
    def degrees(self):
        d = np.array([len(a) for a in self.adjacency], dtype=np.int64)
        d.setflags(write=False)
        return d

    @cached_property
    def boundary_mask(self):
        m = np.zeros(self.vertex_count, dtype=bool)
        m[list(self.boundary)] = True
        m.setflags(write=False)
        return m

    @cached_property
    def csr(self):
        """``(indptr, indices, edge_ids)``; ``edge_ids[k]`` is the edge behind ``indices[k]``."""
        n = self.vertex_count
        m = self.edge_count
        heads = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        tails = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        ids = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((tails, heads))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
        out = (indptr, tails[order].astype(np.int64), ids[order].astype(np.int64))
        for a in out:
            a.setflags(write=False)
        return out

    @cached_property
    def edge_index(self):
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges.tolist())}

    def edge_id(self, u, v):
        u, v = (u, v) if u < v else (v, u)
        return self.edge_index[(u, v)]

    def neighbors(self, v):
        return self.adjacency[v]

    def distances(self, source=None):
        """BFS distances from ``source`` (default: basepoint); -1 if unreachable."""
        source = self.basepoint if source is None else source
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        adj = self.adjacency
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    @cached_property
    def base_distances(self):
        d = self.distances()
        d.setflags(write=False)
        return d

    @property
    def radius(self):
        """Distance from the basepoint to the nearest boundary vertex (inf if none)."""
        if not self.boundary:
            return float("inf")
        d = self.base_distances[list(self.boundary)]
        d = d[d >= 0]
        return int(d.min()) if len(d) else float("inf")

    def is_connected(self):
        return bool(np.all(self.base_distances >= 0))

    def check_invariants(self):
        """Raise ``AssertionError`` if symmetry, degree or edge-list bijection fail."""
        adj = self.adjacency
        for u, nb in enumerate(adj):
            assert list(nb) == sorted(set(nb)), f"neighbor list of {u} not sorted/simple"
            for w in nb:
                assert u in adj[w], f"asymmetric adjacency {u}-{w}"
            assert len(nb) <= self.degree_bound
        from_adj = {(u, w) for u, nb in enumerate(adj) for w in nb if u < w}
        from_edges = {(int(a), int(b)) for a, b in self.edges.tolist()}
        assert from_adj == from_edges and len(from_edges) == self.edge_count
        if self.vertex_count > 1 and self.radius != float("inf") and self.radius >= 1:
            assert self.basepoint not in self.boundary
        return True

    def to_networkx(self):
        import networkx as nx

        h = nx.Graph()
        h.add_nodes_from(range(self.vertex_count))
        h.add_edges_from(self.edges.tolist())
        return h

    def __repr__(self):
        return (f"Graph({self.family_tag!r}, n={self.vertex_count}, m={self.edge_count}, "
                f"o={self.basepoint}, |boundary|={len(self.boundary)})")


@dataclass(frozen=True, eq=False)
class HorocyclicTree:
    """A window of the 3-regular tree sliced into horocycles.

    ``level[v]`` is the horocycle index; ``parent[v]`` is the neighbor one
    level closer to the distinguished end (``-1`` at the top of the window).
    """

    underlying: Graph
    level: np.ndarray
    parent: np.ndarray

    @property
    def depth(self):
        return int(self.level.max())

    def children(self, v):
        return [w for w in self.underlying.adjacency[v] if self.parent[w] == v]


def _cap(n, max_vertices):
    if n > max_vertices:
        raise GraphSizeError(f"{n} vertices exceeds cap {max_vertices}")


def _ball_from_implicit(root, neighbors, radius, family_tag, degree_bound, max_vertices):
    """Graph-metric ball around ``root`` of an implicitly given graph."""
    index = {root: 0}
    labels = [root]
    dist = [0]
    queue = deque([root])
    while queue:
        x = queue.popleft()
        dx = dist[index[x]]
        if dx == radius:
            continue
        for y in neighbors(x):
            if y not in index:
                index[y] = len(labels)
                labels.append(y)
                dist.append(dx + 1)
                _cap(len(labels), max_vertices)
                queue.append(y)
    edges = []
    for i, x in enumerate(labels):
        for y in neighbors(x):
            j = index.get(y)
            if j is not None and i < j:
                edges.append((i, j))
    boundary = [i for i, d in enumerate(dist) if d == radius]
    g = Graph.from_edges(len(labels), edges, 0, boundary, family_tag, degree_bound,
                         max_vertices=max_vertices)
    return g, labels


def tree_words_neighbors(degree):
    """Neighbor function of ``T_degree`` on words: root ``()``, the root has
    ``degree`` children and every other vertex ``degree - 1``."""

    def nb(word):
        if not word:
            return [(c,) for c in range(degree)]
        return [word[:-1]] + [word + (c,) for c in range(degree - 1)]

    return nb


def gen_torus(dim, side, max_vertices=DEFAULT_MAX_VERTICES):
    """Discrete torus ``(Z/side)^dim``: vertex-transitive, ``2*dim``-regular, no boundary."""
    if dim < 1 or side < 3:
        raise ValueError("torus needs dim >= 1 and side >= 3")
    n = side ** dim
    _cap(n, max_vertices)
    idx = np.arange(n)
    coords = np.stack(np.unravel_index(idx, (side,) * dim), axis=1)
    edges = []
    for axis in range(dim):
        shifted = coords.copy()
        shifted[:, axis] = (shifted[:, axis] + 1) % side
        nxt = np.ravel_multi_index(shifted.T, (side,) * dim)
        edges.append(np.stack([idx, nxt], axis=1))
    return Graph.from_edges(n, np.concatenate(edges), 0, (), f"torus:{dim}:{side}", 2 * dim,
                            meta={"transitive": True}, max_vertices=max_vertices)


def tree_ball_size(degree, radius):
    if radius == 0:
        return 1
    return 1 + degree * ((degree - 1) ** radius - 1) // (degree - 2)


def gen_tree_ball(degree, radius, max_vertices=DEFAULT_MAX_VERTICES):
    """Ball of radius ``radius`` in the ``degree``-regular tree, boundary = sphere."""
    if degree < 3:
        raise ValueError("tree degree must be >= 3")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    _cap(tree_ball_size(degree, radius), max_vertices)
    # Level-order construction: parent of vertex i at level k >= 1 is known arithmetically.
    n = tree_ball_size(degree, radius)
    child = np.arange(1, n)
    parent = np.empty(n - 1, dtype=np.int64)
    if n > 1:
        parent[:degree] = 0
        # vertices 1..n-1; vertex v >= degree+1 has parent (v - degree - 1)//(degree-1) + 1
        rest = child[degree:]
        parent[degree:] = (rest - degree - 1) // (degree - 1) + 1
    edges = np.stack([parent, child], axis=1)
    first_of_last = tree_ball_size(degree, radius - 1) if radius >= 1 else 0
    boundary = range(first_of_last, n)
    return Graph.from_edges(n, edges, 0, boundary, f"tree:{degree}:r{radius}", degree,
                            max_vertices=max_vertices)


def gen_grid_ball(dim, radius, max_vertices=DEFAULT_MAX_VERTICES):
    """``l_inf`` ball ``[-r, r]^dim`` of ``Z^dim``; boundary is the outer shell."""
    if dim < 1 or radius < 0:
        raise ValueError("grid needs dim >= 1 and radius >= 0")
    side = 2 * radius + 1
    n = side ** dim
    _cap(n, max_vertices)
    shape = (side,) * dim
    idx = np.arange(n)
    coords = np.stack(np.unravel_index(idx, shape), axis=1)
    edges = []
    for axis in range(dim):
        ok = coords[:, axis] < side - 1
        a = idx[ok]
        shifted = coords[ok].copy()
        shifted[:, axis] += 1
        edges.append(np.stack([a, np.ravel_multi_index(shifted.T, shape)], axis=1))
    shell = np.any((coords == 0) | (coords == side - 1), axis=1)
    center = int(np.ravel_multi_index((radius,) * dim, shape))
    e = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)
    return Graph.from_edges(n, e, center, np.flatnonzero(shell), f"grid:{dim}:r{radius}",
                            2 * dim, meta={"coords": coords - radius},
                            max_vertices=max_vertices)


def gen_tree_cross_z_ball(tree_degree, radius, max_vertices=DEFAULT_MAX_VERTICES):
    """Graph-metric ball of ``T_d x Z`` around ``(root, 0)``."""
    if tree_degree < 3 or radius < 0:
        raise ValueError("treez needs degree >= 3 and radius >= 0")
    tnb = tree_words_neighbors(tree_degree)

    def nb(x):
        word, z = x
        return [(w, z) for w in tnb(word)] + [(word, z - 1), (word, z + 1)]

    g, _ = _ball_from_implicit(((), 0), nb, radius, f"treez:{tree_degree}:r{radius}",
                               tree_degree + 2, max_vertices)
    return g


def parse_length_law(law):
    """Normalise a length law to ``("geom", q)`` or ``("finite", {k: p})``."""
    if isinstance(law, tuple) and law and law[0] == "geom":
        q = float(law[1])
        if not 0 < q <= 1:
            raise ValueError("geometric parameter must be in (0, 1]")
        return ("geom", q)
    if isinstance(law, Mapping):
        items = {int(k): float(p) for k, p in law.items() if float(p) > 0}
        if not items or min(items) < 1:
            raise ValueError("length law must be supported on positive integers")
        if abs(sum(items.values()) - 1) > 1e-9:
            raise ValueError("length law probabilities must sum to 1")
        return ("finite", items)
    if isinstance(law, int) and law >= 1:
        return ("finite", {law: 1.0})
    raise ValueError(f"invalid length law {law!r}")


def gen_stretched(g, length_law, seed, max_vertices=DEFAULT_MAX_VERTICES):
    """Replace every edge by a path of i.i.d. length ``L_e`` (fresh interior vertices)."""
    kind, par = parse_length_law(length_law)
    rng = generator(seed, 0x57E7)
    m = g.edge_count
    if kind == "geom":
        lengths = rng.geometric(par, size=m)
    else:
        ks = np.array(sorted(par))
        ps = np.array([par[k] for k in ks])
        lengths = ks[rng.choice(len(ks), size=m, p=ps / ps.sum())]
    n = g.vertex_count + int((lengths - 1).sum())
    _cap(n, max_vertices)
    new_edges = []
    nxt = g.vertex_count
    for (u, v), L in zip(g.edges.tolist(), lengths.tolist()):
        chain = [u] + list(range(nxt, nxt + L - 1)) + [v]
        nxt += L - 1
        new_edges.extend(zip(chain[:-1], chain[1:]))
    return Graph.from_edges(n, new_edges, g.basepoint, g.boundary,
                            f"stretch({g.family_tag},{_law_tag(kind, par)})",
                            max(g.degree_bound, 2),
                            meta={"lengths": lengths, "original": g}, max_vertices=max_vertices)


def _law_tag(kind, par):
    if kind == "geom":
        return f"geom:{par:g}"
    return "law:" + ",".join(f"{k}={p:g}" for k, p in sorted(par.items()))


def parse_offspring_law(law):
    """Offspring law as ``{k: p}`` with ``sum p == 1``; accepts dicts or ``"0=0.5,2=0.5"``."""
    if isinstance(law, str):
        items = {}
        for part in law.split(","):
            k, _, p = part.partition("=")
            if not _:
                raise ValueError(f"bad offspring law term {part!r}")
            items[int(k)] = float(Fraction(p))
        law = items
    items = {int(k): float(p) for k, p in law.items() if float(p) > 0}
    if not items or min(items) < 0:
        raise ValueError("offspring law must be supported on nonnegative integers")
    if abs(sum(items.values()) - 1) > 1e-9:
        raise ValueError("offspring law probabilities must sum to 1")
    return items


def gen_gw_tree(offspring_law, depth, seed, max_retries=10_000,
                max_vertices=DEFAULT_MAX_VERTICES):
    """Galton-Watson tree cut at generation ``depth``, conditioned on reaching it.

    Conditioning is by rejection; ``meta["resamples"]`` counts the rejected trees.
    """
    law = parse_offspring_law(offspring_law)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    ks = np.array(sorted(law))
    ps = np.array([law[k] for k in ks])
    ps = ps / ps.sum()
    rng = generator(seed, 0x6A1)
    for attempt in range(max_retries + 1):
        parents = []
        generation = np.array([0])
        total = 1
        for _ in range(depth):
            counts = ks[rng.choice(len(ks), size=len(generation), p=ps)]
            size = int(counts.sum())
            if size == 0:
                generation = generation[:0]
                break
            new = np.arange(total, total + size)
            parents.append(np.stack([np.repeat(generation, counts), new], axis=1))
            total += size
            _cap(total, max_vertices)
            generation = new
        if len(generation):
            edges = np.concatenate(parents) if parents else np.zeros((0, 2), dtype=np.int64)
            return Graph.from_edges(total, edges, 0, generation.tolist(),
                                    f"gw:{_law_str(law)}:d{depth}", int(ks.max()) + 1,
                                    meta={"resamples": attempt}, max_vertices=max_vertices)
    raise RuntimeError(f"no surviving tree within {max_retries} retries (extinction cap)")


def _law_str(law):
    return ",".join(f"{k}={p:g}" for k, p in sorted(law.items()))


def gen_horocyclic_tree(depth, max_vertices=DEFAULT_MAX_VERTICES):
    """Window of ``T_3`` spanning horocycles ``-depth..depth`` below one vertex.

    Level ``n + 1`` lies one step further from the distinguished end than level
    ``n``; the window is the binary tree hanging from a single top vertex, so
    ``|H_{n+1}| = 2 |H_n|``.  The extreme levels form the boundary.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n = 2 ** (2 * depth + 1) - 1
    _cap(n, max_vertices)
    child = np.arange(1, n)
    parent_of = (child - 1) // 2
    level = np.floor(np.log2(np.arange(1, n + 1))).astype(np.int64) - depth
    parent = np.concatenate([[-1], parent_of]).astype(np.int64)
    bottom = np.flatnonzero(level == depth)
    base = int(np.flatnonzero(level == 0)[0])
    g = Graph.from_edges(n, np.stack([parent_of, child], axis=1), base,
                         [0, *bottom.tolist()], f"horo:d{depth}", 3,
                         max_vertices=max_vertices)
    level.setflags(write=False)
    parent.setflags(write=False)
    return HorocyclicTree(g, level, parent)


class RegularTree:
    """The infinite ``degree``-regular tree, labelled lazily by words.

    Used where an explicit ball would be astronomically large (long walks,
    exact laws at times beyond ~20).  Vertices are tuples; the root is ``()``.
    """

    def __init__(self, degree):
        if degree < 3:
            raise ValueError("tree degree must be >= 3")
        self.degree = int(degree)
        self.basepoint = ()
        self.neighbors = tree_words_neighbors(self.degree)
        self.family_tag = f"tree:{self.degree}"

    def sphere_size(self, k):
        return 1 if k == 0 else self.degree * (self.degree - 1) ** (k - 1)

    def dist(self, v):
        return len(v)

    def ball(self, radius, max_vertices=DEFAULT_MAX_VERTICES):
        return gen_tree_ball(self.degree, radius, max_vertices)

    def __repr__(self):
        return f"RegularTree({self.degree})"


# ---------------------------------------------------------------- DSL ----

_SIMPLE = {
    "torus": re.compile(r"torus:(\d+):(\d+)$"),
    "tree": re.compile(r"tree:(\d+):r(\d+)$"),
    "grid": re.compile(r"grid:(\d+):r(\d+)$"),
    "treez": re.compile(r"treez:(\d+):r(\d+)$"),
    "horo": re.compile(r"horo:d(\d+)$"),
}
_FAMILY = re.compile(r"(tree|grid|treez):(\d+)$")


def _error_column(spec, prefix_len):
    return min(prefix_len + 1, len(spec) + 1)


def parse_graph_spec(spec, seed=None, max_vertices=DEFAULT_MAX_VERTICES):
    """Build a graph from a DSL string such as ``tree:3:r12`` or ``stretch(grid:2:r4,geom:0.5)``.

    Stochastic specs (``gw``, ``stretch``) require ``seed``.
    """
    spec = spec.strip()
    if spec.startswith("stretch(") and spec.endswith(")"):
        inner = spec[len("stretch("):-1]
        base, sep, law = inner.rpartition(",")
        if not sep:
            raise GraphSpecError("stretch needs '<spec>,<law>'", spec, len(spec))
        m = re.fullmatch(r"geom:([0-9./eE+-]+)", law.strip())
        if m:
            length_law = ("geom", float(Fraction(m.group(1))))
        else:
            m = re.fullmatch(r"law:(.+)", law.strip())
            if not m:
                raise GraphSpecError("unknown length law", spec, len("stretch(") + len(base) + 2)
            length_law = {int(k): float(Fraction(p)) for k, p in
                          (t.split("=") for t in m.group(1).split("+"))}
        if seed is None:
            raise GraphSpecError("stretch specs need a seed", spec)
        g = parse_graph_spec(base, seed=seed, max_vertices=max_vertices)
        return gen_stretched(g, length_law, seed, max_vertices)
    if spec.startswith("gw:"):
        m = re.fullmatch(r"gw:(.+):d(\d+)", spec)
        if not m:
            raise GraphSpecError("expected gw:<law>:d<depth>", spec, len(spec) + 1)
        if seed is None:
            raise GraphSpecError("gw specs need a seed", spec)
        try:
            law = parse_offspring_law(m.group(1))
        except ValueError as exc:
            raise GraphSpecError(str(exc), spec, 4) from None
        return gen_gw_tree(law, int(m.group(2)), seed, max_vertices=max_vertices)
    kind = spec.split(":", 1)[0]
    pattern = _SIMPLE.get(kind)
    if pattern is None:
        raise GraphSpecError(f"unknown graph family {kind!r}", spec, 1)
    m = pattern.match(spec)
    if not m:
        # report the first column at which the longest valid prefix stops
        col = len(kind) + 1
        for cut in range(len(spec), len(kind), -1):
            if _prefix_ok(kind, spec[:cut]):
                col = cut + 1
                break
        raise GraphSpecError(f"malformed {kind} spec", spec, _error_column(spec, col - 1))
    a = [int(x) for x in m.groups()]
    if kind == "torus":
        return gen_torus(a[0], a[1], max_vertices)
    if kind == "tree":
        return gen_tree_ball(a[0], a[1], max_vertices)
    if kind == "grid":
        return gen_grid_ball(a[0], a[1], max_vertices)
    if kind == "treez":
        return gen_tree_cross_z_ball(a[0], a[1], max_vertices)
    return gen_horocyclic_tree(a[0], max_vertices).underlying


def _prefix_ok(kind, prefix):
    full = {"torus": r"torus(:(\d+(:(\d+)?)?)?)?",
            "tree": r"tree(:(\d+(:(r(\d+)?)?)?)?)?",
            "grid": r"grid(:(\d+(:(r(\d+)?)?)?)?)?",
            "treez": r"treez(:(\d+(:(r(\d+)?)?)?)?)?",
            "horo": r"horo(:(d(\d+)?)?)?"}[kind]
    return re.fullmatch(full, prefix) is not None


def parse_family(spec, max_vertices=DEFAULT_MAX_VERTICES) -> Callable[[int], Graph]:
    """Family closure ``radius -> Graph`` from ``tree:3``, ``grid:2`` or ``treez:3``.

    A full spec with a radius is also accepted; the radius is then ignored.
    """
    spec = spec.strip()
    m = _FAMILY.match(spec) or re.match(r"(tree|grid|treez):(\d+):r\d+$", spec)
    if not m:
        raise GraphSpecError("expected a family such as tree:3 or grid:2", spec, 1)
    kind, a = m.group(1), int(m.group(2))
    gen = {"tree": gen_tree_ball, "grid": gen_grid_ball, "treez": gen_tree_cross_z_ball}[kind]

    def family(radius):
        return gen(a, radius, max_vertices)

    family.tag = f"{kind}:{a}"
    return family


# ----------------------------------------------------------- edge list ---

def to_edgelist(g):
    lines = [f"vertices {g.vertex_count} basepoint {g.basepoint}"]
    lines.extend(f"edge {u} {v}" for u, v in g.edges.tolist())
    lines.append("boundary" + "".join(f" {b}" for b in sorted(g.boundary)))
    return "\n".join(lines) + "\n"


def from_edgelist(text, family_tag="edgelist"):
    n = basepoint = None
    edges = []
    boundary = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "vertices":
                if len(parts) != 4 or parts[2] != "basepoint":
                    raise ValueError("expected 'vertices <n> basepoint <o>'")
                n, basepoint = int(parts[1]), int(parts[3])
            elif parts[0] == "edge":
                if len(parts) != 3:
                    raise ValueError("expected 'edge u v'")
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "boundary":
                boundary.extend(int(x) for x in parts[1:])
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if n is None:
        raise ValueError("missing 'vertices' header")
    return Graph.from_edges(n, edges, basepoint, boundary, family_tag)


def induced_subgraph(g, vertices, family_tag=None):
    """Induced subgraph on ``vertices`` (relabelled in sorted order) and the label map."""
    keep = sorted(set(int(v) for v in vertices))
    pos = {v: i for i, v in enumerate(keep)}
    edges = [(pos[u], pos[v]) for u, v in g.edges.tolist() if u in pos and v in pos]
    base = pos.get(g.basepoint, 0)
    bnd = [pos[b] for b in g.boundary if b in pos]
    h = Graph.from_edges(len(keep), edges, base, bnd, family_tag or f"sub({g.family_tag})",
                         g.degree_bound)
    return h, keep


def path_graph(n, boundary_ends=True):
    """Path on ``n`` vertices, basepoint at the middle."""
    edges = [(i, i + 1) for i in range(n - 1)]
    bnd = [0, n - 1] if boundary_ends and n > 1 else []
    return Graph.from_edges(n, edges, n // 2, bnd, f"path:{n}", 2)


def cycle_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], 0, (), f"cycle:{n}", 2,
                            meta={"transitive": True})


def complete_graph(n):
    return Graph.from_edges(n, list(itertools.combinations(range(n), 2)), 0, (),
                            f"complete:{n}", n - 1, meta={"transitive": True})
