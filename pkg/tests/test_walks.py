import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from oracles import binomial_walk_law, tree_distance_law
from percolab.graphs import RegularTree, gen_grid_ball, gen_tree_ball, path_graph
from percolab.percolation import Config, clusters, sample_bond
from percolab.walks import (
    ContaminationError,
    carne_check,
    delayed_transition_matrix,
    distribution_exact,
    entropy,
    entropy_concavity_bound,
    entropy_estimate,
    induced_transition_matrix,
    is_doubly_stochastic,
    return_probabilities,
    spectral_radius_profile,
    spectral_radius_ratio,
    speed_estimate,
    walk_batch,
    walk_delayed,
    walk_induced,
    walk_simple,
)

T3 = RegularTree(3)
RHO = 2 * math.sqrt(2) / 3


def _adjacent(g, path):
    adj = g.adjacency
    return all(int(b) in adj[int(a)] for a, b in zip(path[:-1], path[1:]))


# ---- trajectories

def test_simple_walk_moves_along_edges():
    g = gen_tree_ball(3, 6)
    p = walk_simple(g, 30, 4)
    assert p.vertices[0] == g.basepoint
    assert _adjacent(g, p.vertices)
    assert np.array_equal(p.distances, g.base_distances[p.vertices])
    if p.absorbed:
        assert p.vertices[-1] in g.boundary and len(p) < 31
    else:
        assert len(p) == 31


def test_walk_is_reproducible_by_trial():
    g = gen_tree_ball(3, 8)
    a = walk_simple(g, 7, 11, trial=3)
    b = walk_simple(g, 7, 11, trial=3)
    assert np.array_equal(a.vertices, b.vertices)
    others = [walk_simple(g, 7, 11, trial=i).vertices.tolist() for i in range(20)]
    assert len({tuple(x) for x in others}) > 1


def test_implicit_tree_words_match_distances():
    p = walk_simple(T3, 200, 1)
    for t in (0, 1, 50, 200):
        w = p.vertex(t)
        assert len(w) == p.distances[t]
        assert all(0 <= k < (3 if i == 0 else 2) for i, k in enumerate(w))
    assert np.all(np.abs(np.diff(p.distances)) == 1)


def test_negative_steps_rejected():
    with pytest.raises(ValueError):
        walk_simple(T3, -1, 0)


def test_isolated_basepoint_rejected():
    g = gen_tree_ball(3, 3)
    empty = Config.bond(g, np.zeros(g.edge_count, dtype=bool))
    with pytest.raises(ValueError):
        walk_simple(empty, 5, 0)


def test_delayed_walk_respects_closed_edges():
    g = gen_tree_ball(3, 6)
    cfg = sample_bond(g, 0.7, 2)
    lab = clusters(cfg).label
    for i in range(20):
        p = walk_delayed(cfg, 40, 5, trial=i)
        assert np.all(lab[p.vertices] == lab[g.basepoint])
        moves = p.vertices[1:] != p.vertices[:-1]
        a, b = p.vertices[:-1][moves], p.vertices[1:][moves]
        assert all(int(v) in g.adjacency[int(u)] for u, v in zip(a, b))


def _law_test(sample, law, n):
    for k, m in law.items():
        m = float(m)
        obs = sample.get(k, 0) / n
        assert abs(obs - m) <= 4.5 * math.sqrt(m * (1 - m) / n) + 1e-12, (k, obs, m)


def test_tree_distance_law_matches_recursion():
    n, t = 4000, 7
    paths = walk_batch(T3, t, n, 9)
    _law_test(Counter(int(p.distances[t]) for p in paths), tree_distance_law(3, t), n)


def test_delayed_tree_law_matches_lazy_recursion():
    n, t = 4000, 6
    paths = walk_batch(T3, t, n, 10, kind="delayed")
    _law_test(Counter(int(p.distances[t]) for p in paths),
              tree_distance_law(3, t, lazy=True), n)


def test_speeds_on_t3():
    s = speed_estimate(walk_batch(T3, 1000, 500, 0))
    d = speed_estimate(walk_batch(T3, 1000, 500, 0, kind="delayed"))
    assert abs(s.speed - 1 / 3) < 4 * s.stderr + 2e-3
    assert abs(d.speed - 1 / 4) < 4 * d.stderr + 2e-3
    assert s.liminf <= s.speed
    assert s.absorbed == 0 and s.used == 500


def test_speed_estimate_skips_absorbed():
    g = path_graph(7)
    paths = walk_batch(g, 50, 30, 0)
    assert all(p.absorbed for p in paths)
    with pytest.raises(ValueError):
        speed_estimate(paths)


# ---- exact laws

def test_distribution_on_z_is_binomial():
    g = gen_grid_ball(1, 12)
    for t in (0, 1, 5, 11):
        mu = distribution_exact(g, t, exact=True)
        law = binomial_walk_law(t)
        o = g.basepoint
        for x, m in law.items():
            assert mu.prob(o + x) == m
        assert mu.total() == 1


def test_distribution_contamination():
    g = gen_grid_ball(1, 5)
    with pytest.raises(ContaminationError):
        distribution_exact(g, 5)


@pytest.mark.parametrize("t", [0, 3, 8])
def test_tree_ball_and_implicit_tree_agree(t):
    ball = distribution_exact(gen_tree_ball(3, 9), t, exact=True)
    tree = distribution_exact(T3, t, exact=True)
    law = tree_distance_law(3, t)
    for k, m in law.items():
        assert ball.ball_mass(k) - ball.ball_mass(k - 1) == m
        assert tree.ball_mass(k) - tree.ball_mass(k - 1) == m
    assert tree.total() == 1


def test_float_and_exact_laws_agree():
    g = gen_grid_ball(2, 8)
    a = distribution_exact(g, 6)
    b = distribution_exact(g, 6, exact=True)
    assert np.array_equal(a.vertex, b.vertex)
    assert np.allclose(a.as_float(), b.as_float(), atol=1e-15)


def test_return_probabilities_on_z():
    p = return_probabilities(gen_grid_ball(1, 30), 20)
    for t in range(11):
        assert p[2 * t] == pytest.approx(math.comb(2 * t, t) / 4 ** t, rel=1e-12)
        if t < 10:
            assert p[2 * t + 1] == 0


def test_return_probabilities_tree_ball_vs_implicit():
    a = return_probabilities(gen_tree_ball(3, 10), 9)
    b = return_probabilities(T3, 9)
    assert np.allclose(a, b, rtol=1e-13)


def test_spectral_profile_increases_below_rho():
    prof = spectral_radius_profile(T3, 60)
    tail = prof[5:]
    assert np.all(np.diff(tail) > 0)
    assert np.all(prof < RHO)
    assert abs(spectral_radius_ratio(T3, 80) - RHO) < 2e-3
    with pytest.raises(ContaminationError):
        spectral_radius_profile(gen_tree_ball(3, 5), 5)


# ---- entropy

def test_entropy_of_uniform_and_point_mass():
    g = gen_grid_ball(1, 10)
    assert entropy(distribution_exact(g, 0)) == 0
    mu = distribution_exact(g, 1)
    assert entropy(mu) == pytest.approx(math.log(2))


def test_entropy_estimate_exact_and_plugin_agree():
    est = entropy_estimate(T3, 12, 3000, 0)
    law = tree_distance_law(3, 12)
    h = -sum(float(m) * math.log(float(m) / T3.sphere_size(k)) for k, m in law.items() if m) / 12
    assert est.exact == pytest.approx(h, rel=1e-12)
    assert abs(est.plugin - est.exact) < 4 * est.stderr + 0.01
    assert est.undersampled == 0


@pytest.mark.parametrize("t", [4, 8])
def test_carne_bound(t):
    assert carne_check(gen_grid_ball(2, 10), t) <= 0
    assert carne_check(gen_tree_ball(3, 10), t) <= 0
    assert carne_check(T3, 3 * t) <= 0


def test_carne_refuses_irregular_hosts():
    with pytest.raises(ValueError):
        carne_check(path_graph(9, boundary_ends=False), 2)


@pytest.mark.parametrize("eps", [0.3, 0.5, 0.7, 1.0])
def test_concavity_chain(eps):
    for g, t in ((T3, 30), (gen_grid_ball(2, 20), 15)):
        r = entropy_concavity_bound(g, t, eps)
        assert r.jensen_ok and r.tail_ok  # unconditional
        assert r.inner_entropy + r.tail_entropy == pytest.approx(entropy(distribution_exact(g, t)))
        if r.hypothesis:
            assert r.inner_ok


def test_concavity_rejects_bad_eps():
    with pytest.raises(ValueError):
        entropy_concavity_bound(T3, 5, 0)


# ---- induced chain

def _inner(g, cfg, r):
    # keep the cluster away from the degree-1 boundary, where the chain is not symmetric
    d = g.base_distances
    keep = cfg.edges & (d[g.edges[:, 0]] <= r) & (d[g.edges[:, 1]] <= r)
    return Config.bond(g, keep)


def test_delayed_matrix_is_symmetric_stochastic():
    g = gen_tree_ball(3, 5)
    cfg = _inner(g, sample_bond(g, 0.8, 1), 4)
    P = delayed_transition_matrix(cfg, exact=True)
    k = len(P)
    assert all(sum(row) == 1 for row in P)
    assert all(P[i][j] == P[j][i] for i in range(k) for j in range(k))
    assert is_doubly_stochastic(P)


def test_induced_matrix_is_doubly_stochastic():
    g = gen_tree_ball(3, 4)
    cfg = _inner(g, sample_bond(g, 0.9, 4), 3)
    P = delayed_transition_matrix(cfg, exact=True)
    star = [0, 1, 2] if len(P) > 3 else [0]
    Q = induced_transition_matrix(P, star)
    assert is_doubly_stochastic(Q)
    Qf = induced_transition_matrix(np.array(P, dtype=float), star)
    assert np.allclose(Qf, np.array(Q, dtype=float), atol=1e-12)


def test_induced_chain_on_path_by_hand():
    # lazy path 0-1-2 watched on {0, 2}: from 0 reach 2 before returning w.p. 1/4
    P = [[Fraction(1, 2), Fraction(1, 2), 0], [Fraction(1, 3)] * 3, [0, Fraction(1, 2), Fraction(1, 2)]]
    Q = induced_transition_matrix(P, [0, 2])
    assert Q == [[Fraction(3, 4), Fraction(1, 4)], [Fraction(1, 4), Fraction(3, 4)]]


def test_walk_induced_stays_on_vstar():
    g = gen_tree_ball(3, 6)
    cfg = sample_bond(g, 0.9, 0)
    vstar = [v for v in range(g.vertex_count) if cfg.vertices[v] and g.base_distances[v] <= 2]
    p = walk_induced(cfg, vstar, 50, 1)
    assert set(p.vertices.tolist()) <= set(vstar)
    assert np.all(np.diff(p.return_times) > 0) and p.return_times[0] == 0
    with pytest.raises(ValueError):
        walk_induced(cfg, [v for v in vstar if v != g.basepoint], 5, 1)


def test_long_tree_laws_do_not_overflow():
    mu = distribution_exact(T3, 200)
    assert mu.total() == pytest.approx(1.0)
    # entropy rate of the walk on T3 is log(2)/3; H(mu_t)/t approaches it from above
    assert math.log(2) / 3 < entropy(mu) / 200 < 0.26


# ---- spot values

def test_zero_steps_and_first_step():
    g = gen_tree_ball(3, 4)
    p = walk_simple(g, 0, 1)
    assert p.vertices.tolist() == [g.basepoint]
    mu = distribution_exact(g, 1, exact=True)
    assert sorted(mu.vertex.tolist()) == sorted(g.adjacency[g.basepoint])
    assert set(mu.values) == {Fraction(1, 3)}


def test_two_step_return_on_c4():
    from percolab.graphs import cycle_graph
    c4 = cycle_graph(4)
    n = 100_000
    back = sum(walk_simple(c4, 2, 3, trial=i).vertices[2] == 0 for i in range(n))
    assert abs(back / n - 0.5) < 4.5 * (0.25 / n) ** 0.5
    assert distribution_exact(c4, 2, exact=True).prob(0) == Fraction(1, 2)


def test_mean_distance_after_thirty_steps():
    law = tree_distance_law(3, 30)
    exact = sum(k * m for k, m in law.items()) / 30
    paths = walk_batch(T3, 30, 3000, 2)
    d = np.array([p.distances[30] for p in paths]) / 30
    assert abs(d.mean() - float(exact)) < 4 * d.std(ddof=1) / np.sqrt(len(d))


def test_delayed_walk_edge_cases():
    g = gen_tree_ball(3, 5)
    empty = Config.bond(g, np.zeros(g.edge_count, dtype=bool))
    assert set(walk_delayed(empty, 20, 0).vertices.tolist()) == {g.basepoint}
    # on the full graph the walk holds with probability 1/(deg + 1) at interior vertices
    holds = 0
    n = 20000
    for i in range(n):
        v = walk_delayed(Config.full(g), 1, 4, trial=i).vertices
        holds += v[1] == v[0]
    assert abs(holds / n - 0.25) < 4.5 * (0.1875 / n) ** 0.5


def test_induced_walk_edge_cases():
    g = gen_tree_ball(3, 6)
    cfg = _inner(g, Config.full(g), 4)
    cluster = np.flatnonzero(clusters(cfg).label == clusters(cfg).label[g.basepoint]).tolist()
    z = walk_induced(cfg, cluster, 40, 8, trial=2)
    d = walk_delayed(cfg, 40, 8, trial=2)
    assert np.array_equal(z.vertices, d.vertices)
    assert z.return_times.tolist() == list(range(41))
    o = walk_induced(cfg, [g.basepoint], 10, 8, trial=2)
    assert set(o.vertices.tolist()) == {g.basepoint}
    assert len(o) == 11 and not o.absorbed
    # return times are the visits of the same delayed path to o
    long = walk_delayed(cfg, int(o.return_times[-1]), 8, trial=2).vertices
    visits = np.flatnonzero(long == g.basepoint)
    assert visits.tolist() == o.return_times.tolist()


def test_speed_on_z_vanishes():
    z = gen_grid_ball(1, 1000)
    s = speed_estimate(walk_batch(z, 400, 300, 1))
    # E|S_T|/T = sqrt(2 / (pi T)) for the walk on Z
    assert abs(s.speed - math.sqrt(2 / (math.pi * 400))) < 4 * s.stderr


def test_law_on_z_at_distance_ten():
    z = gen_grid_ball(1, 64)
    mu = distribution_exact(z, 10, exact=True)
    assert mu.prob(z.basepoint + 10) == Fraction(1, 2 ** 10)
    assert carne_check(z, 10) < 0


def test_spectral_profiles_of_recurrent_hosts():
    from percolab.graphs import cycle_graph
    prof = spectral_radius_profile(gen_grid_ball(1, 200), 150)
    t = np.arange(1, 151)
    assert np.all(prof >= 1 - 2 * np.log(2 * t + 1) / (2 * t))
    assert prof[-1] > 0.98
    assert spectral_radius_profile(cycle_graph(4), 30)[-1] == pytest.approx(1 / 2 ** (1 / 60))


def test_entropy_spot_values():
    z = gen_grid_ball(1, 30)
    law = binomial_walk_law(20)
    h = -sum(float(m) * math.log(float(m)) for m in law.values()) / 20
    assert entropy_estimate(z, 20, 0, 0).exact == pytest.approx(h, rel=1e-12)
    assert entropy_estimate(z, 0, 10, 0).exact == 0
    est = entropy_estimate(T3, 20, 0, 0)
    assert est.exact >= (1 / 3) ** 2 / 2


def test_concavity_spot_values():
    r = entropy_concavity_bound(gen_grid_ball(1, 30), 20, 0.3)
    assert r.ok and r.hypothesis
    r = entropy_concavity_bound(T3, 16, 0.5)
    assert r.inner_ok and r.tail_ok
    r = entropy_concavity_bound(T3, 10, 1.0)
    assert r.tail_entropy == 0 and r.radius == 10
