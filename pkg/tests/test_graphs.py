import math

import networkx as nx
import numpy as np
import pytest

from oracles import as_nx
from percolab.graphs import (
    Graph,
    GraphSizeError,
    GraphSpecError,
    RegularTree,
    complete_graph,
    cycle_graph,
    from_edgelist,
    gen_grid_ball,
    gen_gw_tree,
    gen_horocyclic_tree,
    gen_stretched,
    gen_torus,
    gen_tree_ball,
    gen_tree_cross_z_ball,
    parse_family,
    parse_graph_spec,
    to_edgelist,
    tree_ball_size,
)


def shell_oracle(g, radius):
    d = nx.single_source_shortest_path_length(as_nx(g), g.basepoint)
    return {v for v, k in d.items() if k == radius}


# ---- torus

@pytest.mark.parametrize("dim,side,n,m", [(1, 4, 4, 4), (2, 3, 9, 18), (2, 32, 1024, 2048)])
def test_torus_counts(dim, side, n, m):
    g = gen_torus(dim, side)
    assert (g.vertex_count, g.edge_count) == (n, m)
    assert set(g.degrees.tolist()) == {2 * dim}
    assert not g.boundary
    g.check_invariants()


def test_torus_rejects_small_side():
    with pytest.raises(ValueError):
        gen_torus(2, 2)


def test_torus_is_vertex_transitive_in_networkx():
    G = as_nx(gen_torus(2, 4))
    assert nx.is_isomorphic(G, nx.grid_2d_graph(4, 4, periodic=True))


# ---- tree balls

@pytest.mark.parametrize("d,r,n", [(3, 1, 4), (3, 2, 10), (4, 3, 53), (3, 6, 190)])
def test_tree_ball_counts(d, r, n):
    g = gen_tree_ball(d, r)
    assert g.vertex_count == n == tree_ball_size(d, r)
    assert g.vertex_count == 1 + d * ((d - 1) ** r - 1) // (d - 2)
    assert nx.is_tree(as_nx(g))
    assert set(g.boundary) == shell_oracle(g, r)


def test_tree_ball_star():
    g = gen_tree_ball(3, 1)
    assert len(g.boundary) == 3 and g.degrees[g.basepoint] == 3
    assert g.basepoint not in g.boundary


def test_size_cap():
    with pytest.raises(GraphSizeError):
        gen_tree_ball(3, 30, max_vertices=10_000)


# ---- grid and product balls

def test_grid_path():
    g = gen_grid_ball(1, 5)
    assert g.vertex_count == 11
    assert len(g.boundary) == 2
    assert all(g.degrees[b] == 1 for b in g.boundary)


def test_grid_small_and_count():
    g = gen_grid_ball(2, 1)
    assert g.vertex_count == 9 and len(g.boundary) == 8
    assert gen_grid_ball(2, 20).vertex_count == 41 ** 2


def test_grid_boundary_is_sup_norm_shell():
    g = gen_grid_ball(2, 4)
    coords = np.asarray(g.meta["coords"])
    shell = {i for i, c in enumerate(coords) if np.abs(c).max() == 4}
    assert set(g.boundary) == shell


def test_tree_cross_z():
    assert gen_tree_cross_z_ball(3, 0).vertex_count == 1
    g = gen_tree_cross_z_ball(3, 1)
    assert g.vertex_count == 6 and g.degrees[g.basepoint] == 5
    g2 = gen_tree_cross_z_ball(3, 2)
    inner = [v for v in range(g2.vertex_count) if v not in g2.boundary]
    assert set(g2.degrees[inner].tolist()) == {5}
    # BFS oracle on the explicit product of a big tree ball and a path
    T = as_nx(gen_tree_ball(3, 3))
    P = nx.path_graph(range(-3, 4))
    prod = nx.cartesian_product(T, P)
    d = nx.single_source_shortest_path_length(prod, (0, 0), cutoff=2)
    assert g2.vertex_count == len(d)
    assert len(g2.boundary) == sum(1 for k in d.values() if k == 2)


# ---- stretched, Galton-Watson

def test_stretch_identity_is_isomorphic():
    g = gen_tree_ball(3, 3)
    s = gen_stretched(g, {1: 1.0}, seed=3)
    assert nx.is_isomorphic(as_nx(g), as_nx(s))


def test_stretch_c4_to_c8():
    s = gen_stretched(cycle_graph(4), {2: 1.0}, seed=0)
    assert nx.is_isomorphic(as_nx(s), nx.cycle_graph(8))


def test_stretch_geometric_mean_edge_count():
    g = gen_tree_ball(3, 6)
    counts = [gen_stretched(g, ("geom", 0.5), seed=s).edge_count for s in range(200)]
    m = g.edge_count
    # geometric on {1, 2, ...} with q = 1/2: mean 2, variance 2 per edge
    se = math.sqrt(2 * m / 200)
    assert abs(np.mean(counts) - 2 * m) < 3 * se


def test_gw_deterministic_binary():
    g = gen_gw_tree({2: 1.0}, 3, seed=1)
    assert g.vertex_count == 15 and len(g.boundary) == 8


def test_gw_conditioned_root_degree():
    for s in range(20):
        g = gen_gw_tree({0: 0.5, 2: 0.5}, 1, seed=s)
        assert g.degrees[g.basepoint] == 2


def test_gw_mean_boundary_matches_conditioned_expectation():
    # law {1: 1/2, 2: 1/2} never dies out, so conditioning is trivial: E Z_10 = 1.5^10
    sizes = [len(gen_gw_tree({1: 0.5, 2: 0.5}, 10, seed=s).boundary) for s in range(2000)]
    # variance of Z_n for m = 1.5, sigma^2 = 1/4: sigma^2 m^(n-1) (m^n - 1)/(m - 1)
    m, s2, n = 1.5, 0.25, 10
    var = s2 * m ** (n - 1) * (m ** n - 1) / (m - 1)
    assert abs(np.mean(sizes) - m ** n) < 4 * math.sqrt(var / len(sizes))


def test_gw_subcritical_gives_up():
    with pytest.raises(RuntimeError):
        gen_gw_tree({0: 0.9, 1: 0.1}, 30, seed=0, max_retries=50)


# ---- horocyclic window

def test_horocyclic_levels_double():
    h = gen_horocyclic_tree(5)
    sizes = np.bincount(h.level - h.level.min())
    assert all(b == 2 * a for a, b in zip(sizes, sizes[1:]))


def test_horocyclic_parents():
    h = gen_horocyclic_tree(5)
    g = h.underlying
    for v in range(g.vertex_count):
        if v in g.boundary:
            continue
        p = h.parent[v]
        assert p >= 0 and h.level[p] == h.level[v] - 1
        assert len(h.children(v)) == 2
    # parent chains are acyclic; longest runs across the whole window
    longest = 0
    for v in range(g.vertex_count):
        k, u = 0, v
        while h.parent[u] >= 0:
            u = h.parent[u]
            k += 1
            assert k <= g.vertex_count
        longest = max(longest, k)
    assert longest == 2 * h.depth


def test_horocyclic_depth_one_middle_degree():
    h = gen_horocyclic_tree(1)
    g = h.underlying
    mid = [v for v in range(g.vertex_count) if v not in g.boundary]
    assert all(g.degrees[v] == 3 for v in mid)


# ---- DSL, serialization

@pytest.mark.parametrize("spec,n", [("torus:2:3", 9), ("tree:3:r2", 10), ("grid:2:r1", 9),
                                    ("treez:3:r1", 6), ("horo:d1", 7)])
def test_spec_roundtrip(spec, n):
    g = parse_graph_spec(spec)
    assert g.vertex_count == n
    h = from_edgelist(to_edgelist(g))
    assert h.vertex_count == g.vertex_count
    assert np.array_equal(h.edges, g.edges)
    assert h.boundary == g.boundary and h.basepoint == g.basepoint


def test_stochastic_specs_need_seed():
    with pytest.raises(GraphSpecError):
        parse_graph_spec("gw:2=1:d3")
    assert parse_graph_spec("gw:2=1:d3", seed=1).vertex_count == 15
    assert parse_graph_spec("stretch(torus:1:4,law:1=1)", seed=2).vertex_count == 4


@pytest.mark.parametrize("bad,col", [("tree:3", 7), ("tree:x:r3", 6), ("bogus:1", 1)])
def test_malformed_specs_report_column(bad, col):
    with pytest.raises(GraphSpecError) as exc:
        parse_graph_spec(bad)
    assert exc.value.column == col


def test_family_closure():
    fam = parse_family("tree:3")
    assert fam(2).vertex_count == 10 and fam.tag == "tree:3"
    with pytest.raises(GraphSpecError):
        parse_family("torus:2")


def test_edgelist_errors_name_the_line():
    with pytest.raises(ValueError, match="line 2"):
        from_edgelist("vertices 2 basepoint 0\nedge 0\n")


def test_invalid_graphs_rejected():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 2)])


def test_regular_tree_spheres():
    t = RegularTree(3)
    assert [t.sphere_size(k) for k in range(5)] == [1, 3, 6, 12, 24]
    assert len(t.neighbors(())) == 3
    assert all(len(t.neighbors(w)) == 3 for w in t.neighbors(()))
    assert complete_graph(4).edge_count == 6
