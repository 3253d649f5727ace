"""Command-line entry point.

Every option can also be set through an environment variable named ECOTOUR_
followed by the option name in upper case with dashes as underscores, e.g.
ECOTOUR_BUDGET_S=60 or ECOTOUR_SEED=7. Command-line flags win.

Exit codes: 0 success, 1 input or validation error, 2 no feasible tour found.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import EcotourError, InstanceTooLarge, ParseError

ENV_PREFIX = "ECOTOUR_"
EXIT_OK, EXIT_INPUT, EXIT_EMPTY = 0, 1, 2

log = logging.getLogger("ecotour")


def _env(name, default=None):
    """Raw environment value; argparse converts and validates string defaults like flags."""
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _theta(text):
    from .search.state import Theta
    try:
        return Theta.from_sequence(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--theta: {exc}") from None


def _positive(cast):
    def check(text):
        v = cast(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v
    return check


def _fraction(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("--init-frac must lie strictly between 0 and 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="ecotour", description="Turn- and energy-aware tours with time windows.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--instance", default=_env("instance"), help="instance JSON (line graph or road network)")
        sp.add_argument("--out", default=_env("out", "ecotour-out"), help="output directory")
        sp.add_argument("--seed", type=int, default=_env("seed", 0))
        sp.add_argument("--budget-s", type=_positive(float), default=_env("budget_s", None),
                        help="wall-clock budget in seconds")

    s = sub.add_parser("solve", help="initial tours plus local search")
    common(s)
    s.add_argument("--iterations", type=_positive(int), default=_env("iterations", None),
                   help="main-loop iterations; with no --budget-s the run is reproducible")
    s.add_argument("--init-frac", type=_fraction, default=_env("init_frac", 0.25))
    s.add_argument("--init-weights", type=_positive(int), default=_env("init_weights", None),
                   help="weight reductions tried for initial tours when no time budget is set")
    s.add_argument("--theta", type=_theta, default=_env("theta", None),
                   help="six comma-separated hyperparameters (default 8,0.1,100,5,15,10)")
    s.add_argument("--filter-mode", choices=("all", "any"), default=_env("filter_mode", "all"),
                   help="S3Opt segment filter: both objectives above average, or either")
    s.add_argument("--no-plot", action="store_true")

    e = sub.add_parser("exact", help="supported frontier points by weighted-sum MIP solves")
    common(e)
    e.add_argument("--revisit-cap", type=_positive(int), default=_env("revisit_cap", None))
    e.add_argument("--backend", choices=("milp", "builtin", "lp-export"), default=_env("backend", "milp"),
                   help="milp: HiGHS MIP; builtin: own branch and bound; lp-export: write LP files only")
    e.add_argument("--no-precedence", action="store_true", help="drop the copy-order cuts")
    e.add_argument("--no-plot", action="store_true")

    b = sub.add_parser("bench", help="SPB suite in the 10% and 20% terminal scenarios")
    b.add_argument("--suite", default=_env("suite"), help="directory of SPB .txt files")
    b.add_argument("--synthesize", action="store_true",
                   help="write six synthetic SPB-format files into --suite first")
    b.add_argument("--scenario", choices=("10", "20", "both"), default=_env("scenario", "both"))
    b.add_argument("--out", default=_env("out", "ecotour-bench"))
    b.add_argument("--seed", type=int, default=_env("seed", 0))
    b.add_argument("--budget-s", type=_positive(float), default=_env("budget_s", 600.0),
                   help="local-search budget per problem")
    b.add_argument("--iterations", type=_positive(int), default=_env("iterations", None))
    b.add_argument("--init-frac", type=_fraction, default=_env("init_frac", 0.25))
    b.add_argument("--exact-s", type=float, default=_env("exact_s", 0.0),
                   help="time limit of the exact solver per problem; 0 skips it")
    b.add_argument("--jobs", type=_positive(int), default=_env("jobs", 1))
    b.add_argument("--no-plot", action="store_true")
    return p


def _load(path):
    from .netmodel import load_instance
    if not path:
        raise ParseError("no instance given (--instance)")
    return load_instance(path)


def _emit_frontier(tours, out, plot, label):
    from .report import plot_frontiers, write_frontier
    out.mkdir(parents=True, exist_ok=True)
    write_frontier(tours, out / "frontier.csv")
    if plot and tours:
        plot_frontiers({label: [tuple(t.cost) for t in tours]}, out / "frontier.png")


def cmd_solve(args):
    from .search.local import run_local_search
    from .search.state import Theta

    inst = _load(args.instance)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.budget_s is None and args.iterations is None:
        raise EcotourError("set --budget-s or --iterations")
    theta = args.theta or Theta()
    with open(out / "progress.jsonl", "w", encoding="utf-8") as fh:
        Z = run_local_search(inst.graph, inst.windows, budget=args.budget_s, seed=args.seed, theta=theta,
                             iterations=args.iterations, init_fraction=args.init_frac,
                             init_weights=args.init_weights, log=fh, filter_mode=args.filter_mode)
        tours = Z.items()
        if not tours:
            fh.write(json.dumps({"event": "empty", "reason": "no on-time tour found within the budget"}) + "\n")
    _emit_frontier(tours, out, not args.no_plot, "local search")
    log.info("%d tours on the frontier, written to %s", len(tours), out / "frontier.csv")
    return EXIT_OK if tours else EXIT_EMPTY


def cmd_exact(args):
    from .exact.scalarization import scalarize

    inst = _load(args.instance)
    out = Path(args.out)
    cap = args.revisit_cap or inst.revisit_cap
    if args.backend == "lp-export":
        return _export(inst, cap, out, not args.no_precedence)
    engine = "milp" if args.backend == "milp" else "auto"
    res = scalarize(inst.graph, inst.windows, revisit_cap=cap, time_limit=args.budget_s,
                    precedence=not args.no_precedence, engine=engine)
    _emit_frontier(res.tours, out, not args.no_plot, "exact")
    with open(out / "calls.jsonl", "w", encoding="utf-8") as fh:
        for c in res.calls:
            fh.write(json.dumps({"alpha": c.alpha, "beta": c.beta, "status": c.status,
                                 "objective": c.objective, "nodes": c.nodes}) + "\n")
    if not res.complete:
        log.warning("time limit reached; the frontier may be missing supported points")
    return EXIT_OK if res.tours else EXIT_EMPTY


def _export(inst, cap, out, precedence):
    """LP files for the two extreme weightings plus a manifest; further weights follow from their optima."""
    from .exact.lpformat import export_lp
    from .exact.model import build_model, compute_big_m

    out.mkdir(parents=True, exist_ok=True)
    g = inst.graph
    copies = max(1, min(g.n_terminals, cap or g.n_terminals))
    big_m = compute_big_m(g, inst.windows, copies)
    files = []
    for name, (alpha, beta) in (("min_turns", (1.0, 0.0)), ("min_energy", (0.0, 1.0))):
        m = build_model(g, inst.windows, alpha, beta, copies=copies, big_m=big_m, precedence=precedence,
                        max_variables=10 ** 9)
        path = out / f"{name}.lp"
        export_lp(m, path)
        files.append({"file": path.name, "alpha": alpha, "beta": beta, "variables": len(m.names),
                      "constraints": len(m.rows)})
    manifest = {"instance": inst.name, "copies": copies, "precedence": precedence, "models": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("wrote %d LP files and manifest.json to %s", len(files), out)
    return EXIT_OK


def cmd_bench(args):
    from .bench.spb import write_synthetic_suite
    from .bench.suite import report_csv, run_suite

    if not args.suite:
        raise ParseError("no suite directory given (--suite)")
    if args.synthesize:
        write_synthetic_suite(args.suite, args.seed)
    if not Path(args.suite).is_dir():
        raise ParseError(f"suite directory {args.suite} does not exist")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenarios = ("10", "20") if args.scenario == "both" else (args.scenario,)
    budget = None if args.iterations is not None else args.budget_s
    rows = run_suite(args.suite, scenarios, budget=budget, iterations=args.iterations, seed=args.seed,
                     exact_limit=args.exact_s, init_fraction=args.init_frac, jobs=args.jobs,
                     out_dir=None if args.no_plot else out)
    text = report_csv(rows)
    (out / "report.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "exact": cmd_exact, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InstanceTooLarge as exc:
        log.error("%s; use --backend lp-export and an external solver", exc)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except (EcotourError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
