from fractions import Fraction

import pytest

from oracles import min_boundary_ratio
from percolab.expansion import (
    CapExceededError,
    NoAdmissibleSetError,
    alpha_K,
    alpha_sup,
    anchored_expansion_bruteforce,
    edge_boundary,
    growth_profile,
    iso_edge_bruteforce,
    min_ratio_in_subgraph,
)
from percolab.graphs import (
    Graph,
    RegularTree,
    cycle_graph,
    gen_grid_ball,
    gen_torus,
    gen_tree_ball,
    gen_tree_cross_z_ball,
    path_graph,
)
from percolab.percolation import Config


def test_edge_boundary_basics():
    c4 = cycle_graph(4)
    assert edge_boundary(c4, set()) == frozenset()
    assert edge_boundary(c4, range(4)) == frozenset()
    assert len(edge_boundary(c4, {0, 1})) == 2


def test_alpha_k_values():
    assert alpha_K(path_graph(3), [0, 1, 2]) == Fraction(4, 3)
    assert alpha_K(cycle_graph(4), range(4)) == 2
    with pytest.raises(ValueError):
        alpha_K(cycle_graph(4), [])


def test_alpha_k_on_subtrees_is_below_two():
    g = gen_tree_ball(3, 4)
    for k in range(1, 15):
        K = list(range(k))  # BFS order: always a subtree containing the root
        assert alpha_K(g, K) == Fraction(2 * (k - 1), k) < 2


@pytest.mark.parametrize("g,max_size", [
    (gen_tree_ball(3, 3), 6),
    (gen_grid_ball(2, 2), 6),
    (gen_torus(2, 4), 6),
    (gen_tree_cross_z_ball(3, 2), 5),
])
def test_iso_matches_brute_force(g, max_size):
    limit = g.vertex_count // 2 if not g.boundary else None
    res = iso_edge_bruteforce(g, max_size)
    assert res.value == min_boundary_ratio(g, max_size, size_limit=limit)
    # the witness realises the value
    cut = len(edge_boundary(g, res.witness))
    assert Fraction(cut, len(res.witness)) == res.value


def test_iso_tree_values():
    g = gen_tree_ball(3, 8)
    res = iso_edge_bruteforce(g, 12)
    assert res.value == 1 + Fraction(2, 12)
    assert all(s.ratio == 1 + Fraction(2, s.size) for s in res.per_size)


def test_iso_grid_decreases_with_size():
    g = gen_grid_ball(2, 5)
    vals = [iso_edge_bruteforce(g, k).value for k in (1, 4, 9, 16)]
    assert vals == [4, 2, Fraction(4, 3), 1]


def test_iso_single_vertex_interior():
    assert iso_edge_bruteforce(gen_tree_ball(3, 1), 5).value == 3


def test_iso_caps_and_empty():
    with pytest.raises(CapExceededError):
        iso_edge_bruteforce(gen_tree_ball(3, 3), 25)
    g = Graph.from_edges(2, [(0, 1)], 0, [0, 1])
    with pytest.raises(NoAdmissibleSetError):
        iso_edge_bruteforce(g, 2)


def test_regular_identity_iota_equals_d_minus_alpha():
    g = gen_torus(2, 5)
    for k in (2, 4, 6):
        assert iso_edge_bruteforce(g, k).value == 4 - alpha_sup(g, k)


def test_alpha_sup_torus_with_orbit_root():
    assert alpha_sup(gen_torus(2, 16), 12) == Fraction(17, 6)


def test_anchored_profile_tree_at_least_iso():
    g = gen_tree_ball(3, 6)
    prof = anchored_expansion_bruteforce(g, 10)
    iso = iso_edge_bruteforce(g, 10).value
    vals = [v for _, v in prof.values]
    assert all(v >= 1 for v in vals)
    assert min(vals) >= iso
    assert vals == sorted(vals)


def test_anchored_profile_matches_brute_force():
    g = gen_grid_ball(2, 2)
    prof = anchored_expansion_bruteforce(g, 5)
    for n, v in prof.values:
        assert v == min_boundary_ratio(g, 5, must_contain=g.basepoint, min_size=n)


def test_anchored_path_per_size():
    prof = anchored_expansion_bruteforce(path_graph(21), 8)
    assert [s.ratio for s in prof.per_size] == [Fraction(2, n) for n in range(1, 9)]
    # inf over sizes n..8 is attained at the largest size
    assert all(v == Fraction(2, 8) for _, v in prof.values)


def test_anchored_pendant_path_is_the_minimiser():
    # binary tree of depth 3 rooted at 0, plus a pendant path 0 - 15 - 16 - 17 - 18
    edges = [(v, 2 * v + 1) for v in range(7)] + [(v, 2 * v + 2) for v in range(7)]
    edges += [(0, 15), (15, 16), (16, 17), (17, 18)]
    g = Graph.from_edges(19, edges, 0, list(range(7, 15)) + [18])
    prof = anchored_expansion_bruteforce(g, 5)
    witness = prof.witness_sets[0]
    assert {15, 16, 17} <= set(witness)
    assert prof.values[0][1] == min_boundary_ratio(g, 5, must_contain=0)


def test_min_ratio_in_subgraph_matches_host_search():
    g = gen_tree_ball(3, 3)
    cfg = Config.full(g)
    allowed = [v not in g.boundary for v in range(g.vertex_count)]
    ratio, _ = min_ratio_in_subgraph(cfg.adjacency(), allowed, 6)
    assert ratio == iso_edge_bruteforce(g, 6).value


def test_growth_profiles():
    tree = growth_profile(RegularTree(3), 8)
    assert tree.spheres == tuple(3 * 2 ** (n - 1) for n in range(1, 9))
    big = growth_profile(RegularTree(3), 400)
    assert abs(big.gr_estimate - 2) < 0.01
    grid = growth_profile("grid:2", 30)
    # graph-metric spheres of Z^2 have 4n points, so the estimate is (4n)^(1/n) -> 1
    assert grid.spheres == tuple(4 * n for n in range(1, 31))
    assert grid.gr_estimate == pytest.approx(120 ** (1 / 30))
    tz = growth_profile("treez:3", 12)
    assert 1 < tz.gr_estimate <= 3
