"""Acceptance battery.

Each check returns a :class:`CheckResult`; ``run_suite`` dispatches by name.
The same functions back ``percolab suite`` and the acceptance tests.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from percolab._rng import generator
from percolab.expansion import alpha_sup
from percolab.forests import (
    degree_report,
    edge_prob_exact,
    expected_degree_exact,
    p0_threshold,
    ust_free,
    ust_wired,
)
from percolab.graphs import (
    Graph,
    RegularTree,
    complete_graph,
    cycle_graph,
    gen_grid_ball,
    gen_horocyclic_tree,
    gen_torus,
    gen_tree_ball,
)
from percolab.heat import heat_entropy, monotonicity_probe, two_state_entropy
from percolab.percolation import (
    Config,
    horocyclic_audit,
    horocyclic_percolation,
    sample_bond,
)
from percolab.resistance import effective_resistance, fit_log, transience_profile
from percolab.trimming import (
    density_lower_bound,
    forest_audit,
    mass_transport_audit,
    surviving_interior_fraction,
    trim,
    verify_isoperimetry,
)
from percolab.walks import (
    carne_check,
    entropy_concavity_bound,
    speed_estimate,
    spectral_radius_profile,
    spectral_radius_ratio,
    walk_batch,
)


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.measured} ({self.seconds:.1f}s)"


def _mean_se(xs):
    v = np.asarray(xs, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return float(v.mean()), se


# ---------------------------------------------------------- trimming -----

def check_trim_soundness(seed=0, seeds=100):
    g = gen_tree_ball(3, 12)
    worst = Fraction(0)
    bad_removals = 0
    bad_verify = 0
    converged = 0
    for s in range(seeds):
        trace = trim(sample_bond(g, 0.95, seed, trial=s), Fraction(1, 10), seed + s)
        for r in trace.removals:
            worst = max(worst, r.ratio)
            bad_removals += r.ratio >= trace.h
        if trace.converged:
            converged += 1
            bad_verify += not verify_isoperimetry(trace, cap=12).ok
    passed = bad_removals == 0 and bad_verify == 0
    return passed, (f"max removal ratio {float(worst):.4g}, {bad_removals} bad removals, "
                    f"{bad_verify} violations over {converged}/{seeds} converged traces")


def check_density_bound(seed=0, seeds=200):
    g = gen_tree_ball(3, 12)
    p = 0.95
    bound = density_lower_bound(3, 3 * p, 1.0, 1.0, 0.1)
    fr = [surviving_interior_fraction(trim(sample_bond(g, p, seed, trial=s), Fraction(1, 10),
                                           seed + s).final) for s in range(seeds)]
    m, se = _mean_se(fr)
    return m >= bound - 3 * se, f"theta {m:.5f} (se {se:.2g}) vs bound {bound:.4f}"


def check_mass_transport(seed=0, seeds=20):
    host = gen_torus(2, 16)
    alpha = alpha_sup(host, 12)
    h = Fraction(1, 5)
    cons = dec = ident = 0
    sweeps = 0
    for s in range(seeds):
        a = mass_transport_audit(host, sample_bond(host, 0.6, seed, trial=s), h, seed + s,
                                 alpha=alpha)
        cons += a.conserved
        dec += a.decrement_ok
        ident += a.identities_ok
        sweeps += len(a.sweeps)
    passed = cons == dec == seeds
    return passed, (f"alpha {alpha}, conserved {cons}/{seeds}, decrement {dec}/{seeds}, "
                    f"identities {ident}/{seeds}, {sweeps} sweeps")


def check_forest_constant(seed=0, seeds=20):
    torus = gen_torus(2, 8)
    tree = gen_tree_ball(3, 8)
    h = Fraction(1, 10)
    ok = 0
    total = 0
    for s in range(seeds):
        thin = generator(seed, 0xF0C, s).random(torus.edge_count) < 0.8
        f = ust_free(torus, seed, s)
        cfgs = (Config.bond(torus, f.edges & thin), sample_bond(tree, 0.9, seed, trial=s))
        for cfg in cfgs:
            total += 1
            ok += forest_audit(cfg, h, seed + s).ok
    return ok == total, f"{ok}/{total} forest audits pass with constant 2"


# ------------------------------------------------------------- walks -----

def check_speed(seed=0, trials=1000, T=1000):
    tree = RegularTree(3)
    simple = speed_estimate(walk_batch(tree, T, trials, seed, "simple"))
    delayed = speed_estimate(walk_batch(tree, T, trials, seed + 1, "delayed"))
    ratio = delayed.speed / simple.speed
    passed = abs(simple.speed - 1 / 3) <= 0.01 and abs(ratio - 0.75) <= 0.01
    return passed, f"speed {simple.speed:.5f}, delayed {delayed.speed:.5f}, ratio {ratio:.4f}"


def check_spectral_radius():
    tree = RegularTree(3)
    target = 2 * math.sqrt(2) / 3
    final = float(spectral_radius_profile(tree, 40)[-1])
    ratio = spectral_radius_ratio(tree, 40)
    return abs(final - target) <= 0.01, (f"profile {final:.5f} vs {target:.4f} "
                                         f"(ratio estimate {ratio:.5f})")


def check_walk_bounds(eps_grid=(0.3, 0.5, 0.7)):
    hosts = (gen_grid_ball(1, 64), RegularTree(3))
    worst_carne = -math.inf
    rows = 0
    skipped = 0
    bad = 0
    for g in hosts:
        for t in range(1, 21):
            worst_carne = max(worst_carne, carne_check(g, t))
            for eps in eps_grid:
                rep = entropy_concavity_bound(g, t, eps)
                if not rep.hypothesis:
                    skipped += 1
                    continue
                rows += 1
                bad += not rep.ok
    passed = worst_carne <= 1e-12 and bad == 0
    return passed, (f"max carne excess {worst_carne:.3g}, concavity {rows - bad}/{rows} rows "
                    f"({skipped} outside the mass hypothesis)")


# ----------------------------------------------------------- forests -----

def spanning_trees(g):
    """All spanning trees of a small graph, as frozensets of edge ids."""
    n = g.vertex_count
    out = []
    for combo in itertools.combinations(range(g.edge_count), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        ok = True
        for e in combo:
            a, b = find(int(g.edges[e][0])), find(int(g.edges[e][1]))
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            out.append(frozenset(combo))
    return out


def grid_graph(rows, cols):
    idx = lambda r, c: r * cols + c  # noqa: E731
    edges = [(idx(r, c), idx(r, c + 1)) for r in range(rows) for c in range(cols - 1)]
    edges += [(idx(r, c), idx(r + 1, c)) for r in range(rows - 1) for c in range(cols)]
    return Graph.from_edges(rows * cols, edges, 0, (), f"grid{rows}x{cols}", 4)


def check_ust_exact(seed=0, samples=40000):
    hosts = (cycle_graph(4), complete_graph(3), grid_graph(3, 3))
    worst = 0.0
    for g in hosts:
        trees = spanning_trees(g)
        index = {t: i for i, t in enumerate(trees)}
        counts = np.zeros(len(trees))
        for i in range(samples):
            f = ust_free(g, seed, i)
            counts[index[frozenset(np.flatnonzero(f.edges).tolist())]] += 1
        q = 1 / len(trees)
        sd = math.sqrt(samples * q * (1 - q))
        worst = max(worst, float(np.max(np.abs(counts - samples * q)) / sd))
    bridge = Graph.from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3)])
    exact = (edge_prob_exact(cycle_graph(4), 0) == Fraction(3, 4),
             edge_prob_exact(complete_graph(3), 0) == Fraction(2, 3),
             edge_prob_exact(bridge, (2, 3)) == 1)
    sizes = [len(spanning_trees(g)) for g in hosts]
    passed = worst <= 4 and all(exact)
    return passed, f"max |z| {worst:.2f} over {sizes} trees, exact probabilities {all(exact)}"


def check_wsf_degree(seed=0, samples=20000, radii=(6, 8, 10)):
    reps = [degree_report(gen_tree_ball(3, r), "wired", samples, seed) for r in radii]
    exact = [expected_degree_exact(gen_tree_ball(3, r), "wired") for r in radii]
    within = all(abs(rep.mean - e) <= 3 * rep.stderr for rep, e in zip(reps, exact))
    exact_monotone = all(abs(b - 2) < abs(a - 2) for a, b in zip(exact, exact[1:]))
    dist = [abs(rep.mean - 2) for rep in reps]
    mc_monotone = all(b <= a + 3 * math.hypot(ra.stderr, rb.stderr)
                      for a, b, ra, rb in zip(dist, dist[1:], reps, reps[1:]))
    last = reps[-1].mean
    free = degree_report(gen_tree_ball(3, radii[-1]), "free", 10, seed)
    p0 = p0_threshold(free).value
    passed = (within and exact_monotone and mc_monotone and 1.9 <= last <= 2.1
              and free.exact and free.mean == 3 and p0 == Fraction(2, 3))
    means = ", ".join(f"r={r}: {rep.mean:.4f} (se {rep.stderr:.2g}, exact {e:.4f})"
                      for r, rep, e in zip(radii, reps, exact))
    return passed, f"wired {means}; free {free.mean:g}; p0 {p0}"


def check_ohd_gap(seed=0, samples=10000, radii=(4, 8, 12)):
    def gaps(g):
        free = degree_report(g, "free", samples, seed)
        wired = degree_report(g, "wired", samples, seed)
        return free.mean - wired.mean, math.hypot(free.stderr, wired.stderr)

    grid = [gaps(gen_grid_ball(2, r)) for r in radii]
    tree = [gaps(gen_tree_ball(3, r)) for r in radii]
    exact = [expected_degree_exact(gen_grid_ball(2, r), "free")
             - expected_degree_exact(gen_grid_ball(2, r), "wired") for r in radii]
    exact_dec = all(b < a for a, b in zip(exact, exact[1:]))
    mc_dec = all(b <= a + 3 * math.hypot(sa, sb) for (a, sa), (b, sb) in zip(grid, grid[1:]))
    overall = grid[-1][0] < grid[0][0] - 3 * math.hypot(grid[0][1], grid[-1][1])
    agree = all(abs(m - e) <= 3 * s for (m, s), e in zip(grid, exact))
    tree_ok = all(m >= 0.5 for m, _ in tree)
    passed = exact_dec and mc_dec and overall and agree and tree_ok
    g_txt = ", ".join(f"{m:.4f} (se {s:.2g}, exact {e:.4f})" for (m, s), e in zip(grid, exact))
    t_txt = ", ".join(f"{m:.4f}" for m, _ in tree)
    return passed, f"grid gaps {g_txt}; tree gaps {t_txt}"


def _random_host(rng):
    kind = rng.integers(4)
    if kind == 0:
        return gen_torus(2, int(rng.integers(3, 8)))
    if kind == 1:
        return gen_grid_ball(2, int(rng.integers(1, 4)))
    if kind == 2:
        return complete_graph(int(rng.integers(3, 9)))
    n = int(rng.integers(5, 51))
    edges = {(i, int(rng.integers(i))) for i in range(1, n)}
    extra = int(rng.integers(0, 2 * n))
    for _ in range(extra):
        a, b = sorted(rng.choice(n, size=2, replace=False).tolist())
        edges.add((b, a))
    return Graph.from_edges(n, sorted(edges), 0, (), f"random:{n}")


def check_rayleigh(seed=0, triples=200):
    rng = generator(seed, 0x4A7)
    bad = 0
    strict = 0
    for _ in range(triples):
        g = _random_host(rng)
        e = int(rng.integers(g.edge_count))
        keep = rng.random(g.edge_count) < rng.uniform(0.3, 0.95)
        keep[e] = True
        sub = Config.bond(g, keep)
        p_sub = edge_prob_exact(sub, e)
        p_full = edge_prob_exact(g, e)
        bad += p_sub < p_full
        strict += p_sub > p_full
    return bad == 0, f"{bad} violations, {strict} strict increases over {triples} triples"


def check_transience():
    z = transience_profile("grid:1", [4, 8, 16, 32], exact=True)
    z_ok = all(row.resistance == Fraction(row.radius, 2) for row in z)
    radii = [4, 8, 12, 16, 20, 24, 28, 32]
    grid = transience_profile("grid:2", radii, exact=False)
    _, c, r2 = fit_log(radii, [row.resistance for row in grid])
    tree = transience_profile("tree:3", [4, 8, 12])
    last = float(tree[-1].resistance)
    passed = z_ok and r2 >= 0.99 and abs(last - 2 / 3) <= 0.02
    return passed, f"Z exact {z_ok}; grid slope {c:.4f} R2 {r2:.6f}; tree r=12 {last:.5f}"


def check_horocyclic(seed=0, seeds=100, depth=6):
    h = gen_horocyclic_tree(depth)
    cyclic = 0
    wrong = 0
    comps = 0
    for s in range(seeds):
        a = horocyclic_audit(h, horocyclic_percolation(h, 0.8, seed + s))
        cyclic += a["cyclic_interior_components"]
        wrong += sum(c != 1 for c in a["per_component_counts"])
        comps += a["interior_eta_components"]
    return cyclic == 0 and wrong == 0, (f"{comps} interior components, {wrong} without exactly "
                                        f"one extra edge, {cyclic} cyclic")


def check_entropy_probe(seed=0, trials=10000):
    A = np.array([[-0.7, 0.7], [0.7, -0.7]])
    err = max(abs(heat_entropy(A, t) - two_state_entropy(0.7, t)) for t in (0.1, 0.5, 1, 3, 10))
    rep = monotonicity_probe(5, trials, (0.1, 1, 10), 1e-3, seed)
    verified = all(float(v.h_after) < float(v.h_before) for v in rep.violations)
    passed = err <= 1e-10 and verified
    return passed, (f"closed-form error {err:.2g}; {rep.candidates} candidates, "
                    f"{len(rep.violations)} verified violations, min dH {rep.min_dH:.3g}")


SUITES = {
    "trim-soundness": (1, check_trim_soundness),
    "density-bound": (2, check_density_bound),
    "mass-transport": (3, check_mass_transport),
    "forest-constant": (4, check_forest_constant),
    "speed": (5, check_speed),
    "spectral-radius": (6, check_spectral_radius),
    "walk-bounds": (7, check_walk_bounds),
    "ust-exact": (8, check_ust_exact),
    "wsf-degree": (9, check_wsf_degree),
    "ohd-gap": (10, check_ohd_gap),
    "rayleigh": (11, check_rayleigh),
    "transience": (12, check_transience),
    "horocyclic": (13, check_horocyclic),
    "entropy-probe": (14, check_entropy_probe),
}


def run_check(name):
    number, fn = SUITES[name]
    start = time.perf_counter()
    passed, measured = fn()
    return CheckResult(number, name, bool(passed), measured, time.perf_counter() - start)


def run_suite(name):
    """Run one named check, or every check for ``all``."""
    if name == "all":
        return [run_check(n) for n in SUITES]
    if name not in SUITES:
        raise KeyError(name)
    return [run_check(name)]
