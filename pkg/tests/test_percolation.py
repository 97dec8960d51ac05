import math

import numpy as np
import pytest

from oracles import bfs_components, branching_survival, tree_reach_probability
from percolab.graphs import complete_graph, cycle_graph, gen_horocyclic_tree, gen_torus, gen_tree_ball
from percolab.percolation import (
    TRIAL_FIELDS,
    Config,
    boundary_reach_probability,
    clusters,
    horocyclic_audit,
    horocyclic_percolation,
    reaches_boundary,
    sample_bond,
    sample_site,
    trial_records,
)


def test_extreme_probabilities():
    g = gen_tree_ball(3, 3)
    assert sample_bond(g, 1.0, 0).edges.all()
    assert not sample_bond(g, 0.0, 0).edges.any()
    assert sample_site(g, 1.0, 0).vertices.all()
    with pytest.raises(ValueError):
        sample_bond(g, 1.5, 0)
    with pytest.raises(ValueError):
        sample_bond(g, 0.5, None)


def test_bond_mean_on_c4():
    g = cycle_graph(4)
    counts = np.array([sample_bond(g, 0.5, 11, trial=i).edges.sum() for i in range(100_000)])
    assert abs(counts.mean() - 2.0) < 3 * math.sqrt(4 * 0.25 / 100_000)


def test_site_mean_on_k4():
    g = complete_graph(4)
    counts = np.array([sample_site(g, 0.5, 5, trial=i).vertices.sum() for i in range(100_000)])
    assert abs(counts.mean() - 2.0) < 3 * math.sqrt(4 * 0.25 / 100_000)


def test_site_mode_induces_edges():
    g = gen_torus(2, 5)
    c = sample_site(g, 0.6, 3)
    e = g.edges
    assert np.array_equal(c.edges, c.vertices[e[:, 0]] & c.vertices[e[:, 1]])


def test_reproducible_and_coupled():
    g = gen_tree_ball(3, 5)
    assert sample_bond(g, 0.4, 9, trial=2) == sample_bond(g, 0.4, 9, trial=2)
    assert sample_bond(g, 0.4, 9, trial=2) != sample_bond(g, 0.4, 9, trial=3)
    lo, hi = sample_bond(g, 0.3, 9), sample_bond(g, 0.8, 9)
    assert lo.is_subconfig_of(hi)


def test_clusters_full_and_empty():
    g = gen_torus(2, 4)
    assert clusters(Config.full(g)).count == 1
    cd = clusters(Config.bond(g, np.zeros(g.edge_count, dtype=bool)))
    assert cd.count == g.vertex_count and set(cd.sizes.tolist()) == {1}


@pytest.mark.parametrize("seed", range(20))
def test_clusters_match_bfs(seed):
    g = gen_torus(2, 7) if seed % 2 else gen_tree_ball(3, 5)
    c = sample_site(g, 0.7, seed) if seed % 3 == 0 else sample_bond(g, 0.55, seed)
    cd = clusters(c)
    e = g.edges[c.edges]
    comps = bfs_components(g.vertex_count, map(tuple, e.tolist()), c.vertices)
    ours = sorted((frozenset(cd.members(k).tolist()) for k in range(cd.count)), key=min)
    assert ours == comps
    assert cd.sizes.sum() == c.vertices.sum()
    for k, comp in enumerate(ours):
        assert cd.touches_boundary[k] == bool(comp & g.boundary)
        cut = sum((u in comp) != (v in comp) for u, v in g.edges.tolist())
        assert cd.cluster_edge_boundary[k] == cut


def test_reach_probability_extremes():
    g = gen_tree_ball(3, 4)
    assert boundary_reach_probability(g, 1.0, 50, 0).value == 1.0
    assert boundary_reach_probability(g, 0.0, 50, 0).value == 0.0
    with pytest.raises(ValueError):
        boundary_reach_probability(gen_torus(2, 3), 0.5, 5, 0)


def test_reach_probability_matches_tree_recursion():
    g = gen_tree_ball(3, 10)
    est = boundary_reach_probability(g, 0.9, 10_000, 4)
    lo, hi = est.ci
    assert lo <= tree_reach_probability(0.9, 10) <= hi


def test_reach_probability_matches_branching_survival():
    g = gen_tree_ball(3, 12)
    est = boundary_reach_probability(g, 0.7, 4000, 8)
    exact = tree_reach_probability(0.7, 12)
    lo, hi = est.ci
    assert lo <= exact <= hi
    # the finite ball is a slight overestimate of the infinite survival
    assert exact >= branching_survival(0.7) and exact - branching_survival(0.7) < 1e-3


def test_reaches_boundary_agrees_with_clusters():
    g = gen_tree_ball(3, 6)
    for i in range(30):
        c = sample_bond(g, 0.75, 2, trial=i)
        cd = clusters(c)
        assert reaches_boundary(c) == bool(cd.touches_boundary[cd.label[g.basepoint]])


def test_trial_records_fields():
    g = gen_tree_ball(3, 4)
    rows = trial_records(g, 0.8, 5, 1)
    assert len(rows) == 5 and all(len(r) == len(TRIAL_FIELDS) for r in rows)


def test_config_text_roundtrip():
    g = gen_torus(2, 5)
    for c in (sample_bond(g, 0.5, 1), sample_site(g, 0.5, 2),
              Config.mixed(g, sample_site(g, 0.8, 3).vertices, sample_bond(g, 0.6, 4).edges)):
        assert Config.from_text(g, c.to_text()) == c
    assert sample_bond(g, 0.5, 1).to_text().startswith("mode bond\nedges ")


# ---- horocyclic construction

@pytest.mark.parametrize("seed", range(10))
def test_horocyclic_audit(seed):
    h = gen_horocyclic_tree(6)
    cfg = horocyclic_percolation(h, 0.8, seed)
    a = horocyclic_audit(h, cfg)
    assert a["cyclic_interior_components"] == 0
    assert all(c == 1 for c in a["per_component_counts"])
    assert a["eta_prime_edges"] == a["interior_eta_components"]
    assert a["eta_prime_on_boundary_components"] == 0


def test_horocyclic_level_coupling():
    h = gen_horocyclic_tree(5)
    g = h.underlying
    cfg = horocyclic_percolation(h, 0.5, 3)
    eta = cfg.info["eta"]
    lv = np.minimum(h.level[g.edges[:, 0]], h.level[g.edges[:, 1]])
    for n in np.unique(lv):
        vals = set(eta[lv == n].tolist())
        assert len(vals) == 1


def test_horocyclic_full_coins():
    h = gen_horocyclic_tree(4)
    cfg = horocyclic_percolation(h, 1.0 - 1e-12, 0)
    assert cfg.edges.all()
    with pytest.raises(ValueError):
        horocyclic_percolation(h, 0.0, 0)
