"""Command-line runner.

Every subcommand writes CSV (or an edge list for ``gen``) preceded by ``#``
comment lines recording the version, the full resolved configuration and the
seed.  The thread count is left out of the header because it never changes
the output: trials are keyed by ``(seed, trial index)`` and merged in trial
order.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from percolab import __version__
from percolab.graphs import (
    GraphSpecError,
    RegularTree,
    gen_horocyclic_tree,
    parse_family,
    parse_graph_spec,
    to_edgelist,
)

EXIT_USAGE = 2
EXIT_FAILURE = 1

# operations that draw random numbers and therefore need --seed
STOCHASTIC = {"percolate", "trim", "walk", "forest", "ohd-gap", "entropy-probe"}


class UsageError(Exception):
    """Bad input: reported on stderr with exit status 2."""


def fmt(x):
    """12 significant digits for floats; everything else as is."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return str(x)


def write_csv(args, header, rows, extra=()):
    buf = io.StringIO()
    for line in provenance(args):
        buf.write(f"# {line}\n")
    for line in extra:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    emit(args, buf.getvalue())


def emit(args, text):
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def provenance(args):
    skip = {"out", "threads", "func", "command"}
    items = sorted((k, v) for k, v in vars(args).items() if k not in skip)
    config = " ".join(f"{k}={v}" for k, v in items)
    return [f"percolab {__version__}", f"command {args.command}", f"config {config}",
            f"seed {args.seed}"]


def pmap(fn, items, threads):
    """Ordered map, threaded when ``threads > 1``."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------ parsing ----

def _probability(text):
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 <= p <= 1:
        raise argparse.ArgumentTypeError(f"probability out of [0, 1]: {text}")
    return p


def _positive_fraction(text):
    try:
        h = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if h <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return h


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _graph(args, spec=None):
    try:
        return parse_graph_spec(spec or args.graph, seed=args.seed)
    except GraphSpecError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------- commands -----

def cmd_gen(args):
    g = _graph(args)
    text = "".join(f"# {line}\n" for line in provenance(args)) + to_edgelist(g)
    emit(args, text)


def cmd_percolate(args):
    from percolab.percolation import (
        TRIAL_FIELDS,
        clusters,
        horocyclic_audit,
        horocyclic_percolation,
        sample_bond,
        sample_site,
    )

    if args.mode == "horocyclic":
        m = re.fullmatch(r"horo:d(\d+)", args.graph)
        if not m:
            raise UsageError("horocyclic mode needs a horo:d<depth> graph")
        h = gen_horocyclic_tree(int(m.group(1)))

        def one(i):
            cfg = horocyclic_percolation(h, args.p, args.seed + i)
            a = horocyclic_audit(h, cfg)
            cd = clusters(cfg)
            ok = a["cyclic_interior_components"] == 0 and all(
                c == 1 for c in a["per_component_counts"])
            return (i, args.seed + i, args.p, cd.count, int(cd.sizes.max()),
                    a["interior_eta_components"], a["eta_prime_edges"], int(ok))

        rows = pmap(one, range(args.trials), args.threads)
        write_csv(args, ("trial", "seed", "p", "cluster_count", "max_cluster",
                         "interior_components", "extra_edges", "audit_ok"), rows)
        return
    g = _graph(args)
    sampler = sample_bond if args.mode == "bond" else sample_site
    o = g.basepoint

    def one(i):
        c = sampler(g, args.p, args.seed, trial=i)
        cd = clusters(c)
        reach = bool(c.vertices[o] and cd.touches_boundary[cd.label[o]])
        return (i, args.seed, args.p, cd.count, int(cd.sizes.max()) if cd.count else 0,
                int(reach))

    rows = pmap(one, range(args.trials), args.threads)
    hits = sum(r[-1] for r in rows)
    write_csv(args, TRIAL_FIELDS, rows,
              extra=[f"reach_boundary_fraction {fmt(hits / max(args.trials, 1))}"])


def cmd_trim(args):
    from percolab.percolation import sample_bond, sample_site
    from percolab.trimming import trim, verify_isoperimetry

    g = _graph(args)
    sampler = sample_bond if args.mode == "bond" else sample_site
    cfg = sampler(g, args.p, args.seed)
    trace = trim(cfg, args.h, args.seed, max_sweeps=args.sweeps, patience=args.patience)
    rep = verify_isoperimetry(trace, cap=args.cap)
    extra = [f"converged {int(trace.converged)} sweeps {trace.sweeps}",
             f"verify_ok {int(rep.ok)} min_ratio {fmt(rep.min_ratio)} cap {rep.cap}"]
    write_csv(args, ("sweep", "removed_count", "theta_n", "D_n", "max_witness_ratio"),
              trace.rows(), extra)


def _walk_host(args):
    """Tree specs are walked on the implicit tree; ``tree:d:rR`` absorbs at distance ``R``."""
    m = re.fullmatch(r"tree:(\d+)(?::r(\d+))?", args.graph)
    if m and args.mode != "induced":
        return RegularTree(int(m.group(1))), (int(m.group(2)) if m.group(2) else None)
    return _graph(args), None


def _absorb(path, radius):
    if radius is None:
        return path
    hit = np.flatnonzero(path.distances >= radius)
    if not len(hit):
        return path
    from dataclasses import replace

    return replace(path, distances=path.distances[:hit[0] + 1], absorbed=True)


def cmd_walk(args):
    from percolab.percolation import Config, clusters, sample_bond
    from percolab.walks import speed_estimate, walk_delayed, walk_induced, walk_simple

    T = args.steps
    if T < 1:
        raise UsageError("--steps must be at least 1")
    host, radius = _walk_host(args)
    z = 3.0
    rows = []
    if args.mode == "induced":
        g = host
        cfg = sample_bond(g, args.p, args.seed) if args.p is not None else Config.full(g)
        cd = clusters(cfg)
        o = g.basepoint
        if not cfg.vertices[o]:
            raise UsageError("basepoint is not occupied")
        star = np.flatnonzero((cd.label == cd.label[o]) & cfg.vertices
                              & (g.base_distances <= args.vstar_radius)
                              & (g.base_distances >= 0))

        def one(i):
            return walk_induced(cfg, star.tolist(), T, args.seed, trial=i, budget=args.budget)

        paths = pmap(one, range(args.trials), args.threads)
        full = [p for p in paths if len(p) == T + 1]
        if full:
            mean_t = np.array([p.return_times[-1] / T for p in full])
            se = float(mean_t.std(ddof=1) / math.sqrt(len(full))) if len(full) > 1 else 0.0
            m = float(mean_t.mean())
            rows.append((T, "mean_return_time", m, m - z * se, m + z * se, len(full), args.seed))
            d = np.array([p.distances[-1] for p in full], dtype=float)
            se = float(d.std(ddof=1) / math.sqrt(len(full))) if len(full) > 1 else 0.0
            rows.append((T, "mean_distance", float(d.mean()), d.mean() - z * se,
                         d.mean() + z * se, len(full), args.seed))
        rows.append((T, "incomplete_runs", float(len(paths) - len(full)), "", "",
                     len(paths), args.seed))
        write_csv(args, ("t", "estimator", "value", "ci_low", "ci_high", "trials", "seed"),
                  rows, [f"vstar_size {len(star)}"])
        return

    walker = walk_simple if args.mode == "simple" else walk_delayed
    if args.entropy_t and args.mode != "simple":
        raise UsageError("--entropy-t is available for simple walks only")
    obj = host
    if args.p is not None:
        if isinstance(host, RegularTree):
            raise UsageError("percolation walks need an explicit ball, not the implicit tree")
        obj = sample_bond(host, args.p, args.seed)

    def one(i):
        return _absorb(walker(obj, T, args.seed, trial=i), radius)

    paths = pmap(one, range(args.trials), args.threads)
    for t in sorted({max(1, T >> k) for k in range(4)}):
        good = [p for p in paths if len(p) > t]
        if not good or len(good) < len(paths):
            # survivors alone would bias the estimate upward
            continue
        v = np.array([p.distances[t] / t for p in good])
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        rows.append((t, "speed", float(v.mean()), v.mean() - z * se, v.mean() + z * se,
                     len(v), args.seed))
    if not any(p.absorbed for p in paths):
        est = speed_estimate(paths)
        rows.append((T, "liminf_speed", est.liminf, "", "", est.used, args.seed))
    absorbed = sum(p.absorbed for p in paths)
    rows.append((T, "absorbed", float(absorbed), "", "", len(paths), args.seed))
    if args.entropy_t:
        from percolab.walks import entropy_estimate

        te = args.entropy_t
        e = entropy_estimate(obj, te, args.trials, args.seed)
        if e.exact is not None:
            rows.append((te, "entropy_exact", e.exact, "", "", 0, args.seed))
        if e.plugin is not None:
            se = e.stderr or 0.0
            rows.append((te, "entropy_plugin", e.plugin, e.plugin - z * se, e.plugin + z * se,
                         e.trials, args.seed))
    write_csv(args, ("t", "estimator", "value", "ci_low", "ci_high", "trials", "seed"), rows)


def cmd_resist(args):
    from percolab.resistance import fit_log, transience_profile

    try:
        family = parse_family(args.graph)
    except GraphSpecError as exc:
        raise UsageError(str(exc)) from None
    if args.p is not None and args.seed is None:
        raise UsageError("--seed is required with --p")
    rows = transience_profile(family, args.radii, p=args.p, trials=args.trials, seed=args.seed,
                              exact=False if args.numeric else None)
    out = [(r.radius, float(r.resistance), r.stderr, r.samples, r.discarded) for r in rows]
    extra = []
    if len(rows) >= 2:
        a, c, r2 = fit_log(args.radii, [r.resistance for r in rows])
        extra.append(f"log_fit a {fmt(a)} c {fmt(c)} r_squared {fmt(r2)}")
    write_csv(args, ("radius", "resistance", "stderr", "samples", "discarded"), out, extra)


FOREST_FIELDS = ("radius", "bc", "trials", "mean_deg", "ci", "gap")


def _forest_rows(g, radius, bcs, trials, seed):
    from percolab.forests import degree_report

    reps = {bc: degree_report(g, bc, trials, seed) for bc in bcs}
    gap = reps["free"].mean - reps["wired"].mean if len(reps) == 2 else ""
    return [(radius, bc, r.trials, r.mean, 3 * r.stderr, gap) for bc, r in reps.items()]


def _radius_of(spec):
    m = re.search(r":r(\d+)$", spec)
    return int(m.group(1)) if m else ""


def cmd_forest(args):
    g = _graph(args)
    bcs = ("free", "wired") if args.bc == "both" else (args.bc,)
    write_csv(args, FOREST_FIELDS,
              _forest_rows(g, _radius_of(args.graph), bcs, args.trials, args.seed))


def cmd_ohd_gap(args):
    try:
        family = parse_family(args.graph)
    except GraphSpecError as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for r in args.radii:
        rows.extend(_forest_rows(family(r), r, ("free", "wired"), args.trials, args.seed))
    write_csv(args, FOREST_FIELDS, rows)


def cmd_entropy_probe(args):
    from percolab.heat import monotonicity_probe

    try:
        rep = monotonicity_probe(args.n, args.trials, args.t, args.step, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    extra = [f"candidates {rep.candidates} verified_violations {len(rep.violations)}",
             f"min_dH {fmt(rep.min_dH)}"]
    write_csv(args, ("trial", "t", "i", "j", "dH"), rep.rows, extra)
    if rep.violations:
        text = "\n".join(v.certificate() for v in rep.violations)
        if args.certificates:
            with open(args.certificates, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stderr.write(text)


def cmd_suite(args):
    from percolab.suites import SUITES, run_suite

    if args.name != "all" and args.name not in SUITES:
        names = ", ".join(["all", *SUITES])
        raise UsageError(f"unknown suite {args.name!r}; available: {names}")
    results = []
    for res in run_suite(args.name):
        print(res.line(), flush=True)
        results.append(res)
    if args.out:
        write_csv(args, ("criterion", "name", "passed", "measured", "seconds"),
                  [(r.number, r.name, r.passed, r.measured, r.seconds) for r in results])
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} passed")


def cmd_run(args):
    # command-line --out and --threads take precedence over the file
    extra = []
    if args.out is not None:
        extra += ["--out", args.out]
    if args.threads != 1:
        extra += ["--threads", str(args.threads)]
    return main(config_to_argv(args.config, extra))


# ------------------------------------------------------- config files ----

def config_to_argv(path, overrides=()):
    """Translate an INI experiment file into an argument vector.

    The ``[experiment]`` section holds ``operation`` and ``graph`` plus the
    operation's parameters under their option names (dashes or underscores);
    ``seed``, ``threads``, ``out`` and ``cap`` become global flags.  Unknown
    keys are rejected with their line number.  ``overrides`` are global
    flags placed after the file's own, so they win.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}".replace("\n", " ")) from None
    if cp.sections() != ["experiment"]:
        raise UsageError(f"{path}: expected exactly one [experiment] section")
    sec = cp["experiment"]
    lines = text.splitlines()

    def where(key):
        for i, line in enumerate(lines, 1):
            m = re.match(r"\s*([^=:\s]+)\s*[=:]", line)
            if m and m.group(1).lower() == key:
                return f"{path}:{i}:{line.index(m.group(1)) + 1}"
        return path

    op = sec.get("operation")
    if op is None:
        raise UsageError(f"{path}: missing 'operation'")
    parser = build_parser()
    sub = _subparsers(parser).get(op)
    if sub is None or op == "run":
        raise UsageError(f"{where('operation')}: unknown operation {op!r}")
    known = {}
    for action in sub._actions:
        for flag in action.option_strings:
            if flag.startswith("--"):
                known[flag[2:].replace("-", "_")] = (flag, action)
    positional = [a for a in sub._actions if not a.option_strings]
    head, tail = [], [op]
    for key, value in sec.items():
        norm = key.replace("-", "_")
        if key == "operation":
            continue
        if norm in ("seed", "threads", "out", "cap"):
            head += [f"--{norm}", value]
        elif positional and norm == positional[0].dest:
            tail.append(value)
        elif norm in known:
            flag, action = known[norm]
            if action.nargs == 0:
                if value.strip().lower() in ("1", "true", "yes", "on"):
                    tail.append(flag)
            else:
                tail += [flag, value]
        else:
            raise UsageError(f"{where(key)}: unknown key {key!r} for operation {op!r}")
    return head + list(overrides) + tail


# ------------------------------------------------------------- driver ----

def _global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=_nonneg_int, default=d(None),
                        help="master seed (required by stochastic commands)")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads")
    parser.add_argument("--out", default=d(None), help="output path (default stdout)")
    parser.add_argument("--cap", type=int, default=d(12), help="set-size cap for enumeration")


def build_parser():
    parser = argparse.ArgumentParser(prog="percolab",
                                     description="percolation and random-walk experiments")
    parser.add_argument("--version", action="version", version=f"percolab {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("gen", cmd_gen, "write a graph as an edge list")
    p.add_argument("--graph", required=True)

    p = add("percolate", cmd_percolate, "per-trial cluster statistics")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=_probability, required=True)
    p.add_argument("--trials", type=_nonneg_int, default=100)
    p.add_argument("--mode", choices=("bond", "site", "horocyclic"), default="bond")

    p = add("trim", cmd_trim, "trim a percolation sample and list the sweeps")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=_probability, required=True)
    p.add_argument("--h", type=_positive_fraction, required=True)
    p.add_argument("--sweeps", type=_nonneg_int, default=None)
    p.add_argument("--patience", type=int, default=32)
    p.add_argument("--mode", choices=("bond", "site"), default="bond")

    p = add("walk", cmd_walk, "speed (and entropy) of random walks")
    p.add_argument("--graph", required=True)
    p.add_argument("--mode", choices=("simple", "delayed", "induced"), default="simple")
    p.add_argument("--steps", type=_nonneg_int, required=True)
    p.add_argument("--trials", type=_nonneg_int, default=100)
    p.add_argument("--p", type=_probability, default=None,
                   help="walk on a bond percolation sample of the ball")
    p.add_argument("--vstar-radius", type=_nonneg_int, default=1)
    p.add_argument("--budget", type=_nonneg_int, default=1_000_000)
    p.add_argument("--entropy-t", type=_nonneg_int, default=0)

    p = add("resist", cmd_resist, "effective resistance to the ball boundary")
    p.add_argument("--graph", required=True, help="family such as grid:2 or tree:3")
    p.add_argument("--radii", type=_int_list, required=True)
    p.add_argument("--p", type=_probability, default=None)
    p.add_argument("--trials", type=_nonneg_int, default=1)
    p.add_argument("--numeric", action="store_true", help="skip rational elimination")

    p = add("forest", cmd_forest, "basepoint degree in free or wired spanning forests")
    p.add_argument("--graph", required=True)
    p.add_argument("--bc", choices=("free", "wired", "both"), default="wired")
    p.add_argument("--trials", type=_nonneg_int, default=1000)

    p = add("ohd-gap", cmd_ohd_gap, "free minus wired degree over radii")
    p.add_argument("--graph", required=True, help="family such as grid:2 or tree:3")
    p.add_argument("--radii", type=_int_list, required=True)
    p.add_argument("--trials", type=_nonneg_int, default=1000)

    p = add("entropy-probe", cmd_entropy_probe, "search for heat-kernel entropy decreases")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--trials", type=_nonneg_int, default=1000)
    p.add_argument("--t", type=_float_list, default=[0.1, 1.0, 10.0])
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--certificates", default=None, help="file for violation certificates")

    p = add("suite", cmd_suite, "run acceptance checks")
    p.add_argument("name", help="check name or 'all'")

    p = add("run", cmd_run, "run an INI experiment file")
    p.add_argument("config")
    return parser


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command in STOCHASTIC and args.seed is None:
            raise UsageError(f"{args.command} needs --seed")
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        rc = args.func(args)
        return int(rc or 0)
    except UsageError as exc:
        print(f"percolab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError) as exc:
        print(f"percolab: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
