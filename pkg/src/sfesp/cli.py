"""Command-line front end.

Examples::

    sfesp validate --instance inst.json
    sfesp solve --algo semoran --instance inst.json --out sol.json --trace trace.jsonl
    sfesp compare --grid default --out results.csv
    sfesp gap --tasks 5 --repetitions 100 --out gap.csv
    sfesp simulate --timeline colosseum --algo semoran --out sim.csv
    sfesp export-fixtures --out fixtures/
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import fixtures, harness
from .baselines import BaselineConfig, all_profile_chooser
from .exact import OracleLimits, OracleRefusal
from .greedy import CandidateBudgetError, solve_greedy
from .model import (
    InstanceError,
    instance_to_dict,
    load_instance,
    load_solution,
    save_solution,
    validate_instance,
    verify_feasible,
)
from .perf import ProfileError, ProfileRegistry, export_accuracy_csv, load_profiles, validate_profile
from .sim import (
    colosseum_timeline,
    export_report,
    load_timeline,
    run_dynamic,
    run_static,
)
from .solvers import SOLVER_NAMES, get_solver

GRIDS = {
    "default": harness.ExperimentGrid(),
    "small": harness.ExperimentGrid(task_counts=(10, 30), repetitions=2),
}


def _registry(args) -> Optional[ProfileRegistry]:
    return load_profiles(args.fixtures) if args.fixtures else None


def _out(args, default: Optional[str] = None) -> Optional[str]:
    return args.out or default


def cmd_validate(args) -> int:
    problems: list[str] = []
    if args.profiles:
        reg = load_profiles(args.profiles)  # raises with location on the first bad profile
        for obj in list(reg.accuracy.values()) + list(reg.latency.values()):
            problems += validate_profile(obj)
    if args.instance:
        inst = load_instance(args.instance, _registry(args))
        problems += [str(v) for v in validate_instance(inst)]
        if args.solution and not problems:
            problems += [str(v) for v in verify_feasible(inst, load_solution(args.solution))]
    if not (args.profiles or args.instance):
        raise InstanceError("nothing to validate: pass --instance and/or --profiles")
    for p in problems:
        print(p)
    print("ok" if not problems else f"{len(problems)} problem(s)")
    return 0 if not problems else 1


def cmd_solve(args) -> int:
    inst = load_instance(args.instance, _registry(args))
    trace: Optional[list] = [] if args.trace else None
    if args.algo in ("semoran", "flexres-nsem"):
        kw = {} if args.algo == "semoran" else {"choose_profile": all_profile_chooser(BaselineConfig()),
                                                   "algorithm": "flexres-nsem"}
        sol = solve_greedy(inst, trace=trace, **kw)
    else:
        if args.trace:
            raise ValueError(f"--trace is only available for the greedy solvers, not {args.algo!r}")
        limits = OracleLimits(time_budget=args.time_budget)
        sol = get_solver(args.algo, limits=limits)(inst)
    if args.out:
        save_solution(sol, args.out)
    else:
        json.dump(sol.to_dict(), sys.stdout, indent=1)
        print()
    if trace is not None:
        with open(args.trace, "w") as fh:
            for rec in trace:
                fh.write(json.dumps(rec) + "\n")
    bad = verify_feasible(inst, sol)
    print(f"{sol.algorithm}: admitted {len(sol.admitted)}/{len(inst.tasks)}, objective {sol.objective:.6g}, "
          f"{len(bad)} violation(s)", file=sys.stderr)
    return 0


def _grid(args) -> harness.ExperimentGrid:
    if args.grid in GRIDS:
        grid = GRIDS[args.grid]
    else:
        d = json.loads(Path(args.grid).read_text())
        grid = harness.ExperimentGrid(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})
    over = {}
    if args.repetitions is not None:
        over["repetitions"] = args.repetitions
    if args.dims:
        over["resource_dims"] = tuple(args.dims)
    if args.seed is not None:
        over["seed"] = args.seed
    return replace(grid, **over) if over else grid


def cmd_compare(args) -> int:
    grid = _grid(args)
    rows = harness.run_comparison(grid, args.algos, record_time=not args.no_timing, registry=_registry(args))
    out = _out(args, "compare.csv")
    harness.write_csv(rows, harness.COMPARE_FIELDS, out)
    if args.summary:
        harness.write_csv(harness.summarize(rows), harness.SUMMARY_FIELDS, args.summary)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_gap(args) -> int:
    limits = OracleLimits(max_tasks=max(6, max(args.tasks)), time_budget=args.time_budget)
    rows = harness.run_gap_study(args.tasks, args.repetitions, args.seed or 0, limits, _registry(args))
    out = _out(args, "gap.csv")
    harness.write_csv(rows, harness.GAP_FIELDS, out)
    s = harness.gap_summary(rows)
    print(f"wrote {len(rows)} rows to {out}; " + ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                                                       for k, v in s.items()))
    return 0


def cmd_simulate(args) -> int:
    reg = _registry(args)
    inst = load_instance(args.instance, reg) if args.instance else fixtures.colosseum_instance()
    seed = args.seed or 0
    if args.solution:
        report = run_static(inst, load_solution(args.solution), args.duration, args.noise, seed)
    else:
        tl = colosseum_timeline() if args.timeline == "colosseum" else load_timeline(args.timeline)
        if args.algo:
            tl = replace(tl, solver=args.algo)
        report = run_dynamic(inst, tl, args.noise, seed)
    out = _out(args, "sim.csv")
    export_report(report, out)
    for e in report.evictions:
        print(f"period {e.period}: evicted task {'-'.join(map(str, e.task_id))}")
    print(f"wrote {len(report.samples)} samples over {len(report.periods)} period(s) to {out}")
    return 0


def cmd_export_fixtures(args) -> int:
    out = Path(_out(args, "fixtures"))
    out.mkdir(parents=True, exist_ok=True)
    reg = fixtures.build_registry()
    fixtures.write_bundled(out / "profiles.json")
    export_accuracy_csv(reg, out / "accuracy.csv")
    col = instance_to_dict(fixtures.colosseum_instance())
    col["profiles"] = "profiles.json"
    (out / "colosseum_instance.json").write_text(json.dumps(col, indent=1) + "\n")
    (out / "colosseum_timeline.json").write_text(json.dumps(colosseum_timeline().to_dict(), indent=1) + "\n")
    (out / "flex_example.json").write_text(json.dumps(instance_to_dict(fixtures.flex_example()), indent=1) + "\n")
    print(f"wrote fixtures to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--fixtures", help="profiles JSON to use instead of the bundled fixtures")
    common.add_argument("--out", help="output path")

    ap = argparse.ArgumentParser(prog="sfesp", description="Semantic flexible edge slicing solver and harness.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check an instance, profile file or solution")
    p.add_argument("--instance")
    p.add_argument("--profiles")
    p.add_argument("--solution", help="also verify this solution against --instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common], help="solve one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--algo", choices=SOLVER_NAMES, default="semoran")
    p.add_argument("--trace", help="write a JSONL trace of greedy iterations")
    p.add_argument("--time-budget", type=float, default=60.0, help="exact solver time budget in seconds")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", parents=[common], help="run a comparison sweep")
    p.add_argument("--grid", default="default", help="'default', 'small', or a grid JSON file")
    p.add_argument("--algos", nargs="+", choices=[n for n in SOLVER_NAMES if n != "exact"],
                   default=["semoran", "minres-sem", "sl-edge", "flexres-nsem", "highcomp", "highres"])
    p.add_argument("--repetitions", type=int)
    p.add_argument("--dims", type=int, nargs="+")
    p.add_argument("--summary", help="also write per-cell mean/std CSV here")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms=0 for byte-reproducible output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gap", parents=[common], help="greedy vs exact gap study")
    p.add_argument("--tasks", type=int, nargs="+", default=[5])
    p.add_argument("--repetitions", type=int, default=100)
    p.add_argument("--time-budget", type=float, default=60.0)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("simulate", parents=[common], help="replay a timeline or a static solution")
    p.add_argument("--timeline", default="colosseum", help="'colosseum' or a timeline JSON file")
    p.add_argument("--instance", help="instance JSON (default: bundled testbed scenario)")
    p.add_argument("--algo", choices=SOLVER_NAMES, help="override the timeline's solver")
    p.add_argument("--solution", help="replay this fixed solution instead of a timeline")
    p.add_argument("--duration", type=float, default=25.0)
    p.add_argument("--noise", type=float, default=0.0, help="latency noise std in seconds")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-fixtures", parents=[common], help="write bundled fixtures as JSON/CSV")
    p.set_defaults(func=cmd_export_fixtures)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, ProfileError, OracleRefusal, CandidateBudgetError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"sfesp {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
