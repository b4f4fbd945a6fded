"""Command-line entry point ``sim``."""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import sys
from pathlib import Path

from . import analysis
from .comms import CommMode
from .engine.config import ScenarioConfig, load_config, read_pairs
from .engine.experiment import CellResult, load_grid, results_to_csv, run_grid
from .engine.simulation import build_graph, run, write_trace
from .domain import ConfigurationError
from .roadnet import GraphFormatError, RoutingError, dump_graph, generate_grid

MODES = sorted(m.value for m in CommMode)


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    config = load_config(args.config, seed=args.seed, mode=args.mode, runs=args.runs) if args.config \
        else ScenarioConfig().replace(**{k: v for k, v in (("seed", args.seed), ("mode", args.mode),
                                                             ("runs", args.runs)) if v is not None})
    graph = build_graph(config)
    result = CellResult({"mode": config.mode})
    trace = [] if args.trace else None
    for index in range(config.runs):
        result.reports.append(run(config, index, graph, trace if index == 0 else None))
    _write(results_to_csv([result]), args.out)
    if args.trace:
        write_trace(trace, args.trace)
    return 0


def cmd_experiment(args) -> int:
    base = load_config(args.base) if args.base else ScenarioConfig()
    results = run_grid(load_grid(args.grid), base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_to_csv(results))
    return 1 if any(r.error for r in results) else 0


ANALYZE_COLUMNS = ["R", "L", "T", "V", "S", "F", "N", "push_bound", "pull_bound",
                   "push_mc", "push_ci", "pull_mc", "pull_ci"]


def cmd_analyze(args) -> int:
    axes = {}
    for key, value in read_pairs(args.params):
        if key not in ANALYZE_COLUMNS[:7]:
            raise SystemExit(f"unknown straight-road parameter {key!r}")
        cast = int if key == "N" else float
        axes[key] = [cast(v) for v in value.replace("|", ",").split(",") if v.strip()]
    missing = set(ANALYZE_COLUMNS[:7]) - set(axes)
    if missing:
        raise SystemExit(f"missing parameters: {', '.join(sorted(missing))}")
    lines = []
    keys = ANALYZE_COLUMNS[:7]
    for combo in itertools.product(*(axes[k] for k in keys)):
        p = analysis.StraightRoadParams(**dict(zip(keys, combo)))
        row = dict(zip(keys, combo))
        for name, fn in (("push_bound", analysis.p_push_bound), ("pull_bound", analysis.p_pull_bound)):
            try:
                row[name] = fn(p)
            except analysis.DomainError:
                row[name] = None
        for mode in ("push", "pull"):
            est = analysis.monte_carlo_access(p, mode, args.trials, args.seed)
            row[f"{mode}_mc"], row[f"{mode}_ci"] = est.p, est.half_width
        lines.append(row)
    sio = io.StringIO()
    writer = csv.DictWriter(sio, fieldnames=ANALYZE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in lines:
        writer.writerow({k: "" if row[k] is None else row[k] for k in ANALYZE_COLUMNS})
    _write(sio.getvalue(), args.out)
    return 0


def cmd_graph_gen(args) -> int:
    try:
        width, height = (int(v) for v in args.grid.lower().split("x"))
    except ValueError:
        raise SystemExit("--grid expects WxH, e.g. 9x7") from None
    graph = generate_grid(width, height, args.spacing, args.cs, args.rsu, args.seed)
    _write(dump_graph(graph), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="EV charging pub/sub simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario (config.runs runs)")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--runs", type=int)
    p.add_argument("--out")
    p.add_argument("--trace", help="JSON-lines event trace of run 0")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run a parameter grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--base", help="base config the grid overrides")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("analyze", help="straight-road bounds and Monte Carlo estimates")
    p.add_argument("--params", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("graph", help="road graph utilities")
    gsub = p.add_subparsers(dest="graph_command", required=True)
    g = gsub.add_parser("gen", help="synthetic grid graph")
    g.add_argument("--grid", default="9x7")
    g.add_argument("--spacing", type=float, default=500.0)
    g.add_argument("--cs", type=int, default=5)
    g.add_argument("--rsu", type=int, default=7)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out")
    g.set_defaults(func=cmd_graph_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigurationError, GraphFormatError, RoutingError, OSError) as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
