"""Command-line entry point.

Subcommands:
  optimize   build the model, solve it, write the schedule
  validate   parse inputs and check the generated model without solving
  explain    dump generated constraint rows, filtered by tag prefix

Exit codes: 0 solved (optimal or feasible), 2 proven infeasible, 1 any error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BeschedError
from .milp import export_lp
from .pipeline import build_problem, solve_problem
from .schedule import extract_schedule
from .solver import SolveOptions
from .timeseries import write_schedule
from .xmlio import parse_configuration, parse_situation


def _add_input_args(p):
    p.add_argument("--config", required=True, help="building configuration XML")
    p.add_argument("--situation", required=True, help="building situation XML")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="besched", description="Cost-minimal schedules for building energy systems"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="solve and write the schedule")
    _add_input_args(opt)
    opt.add_argument("--out", required=True, help="output directory")
    opt.add_argument("--solver", choices=["builtin", "external"], default="builtin")
    opt.add_argument("--solver-cmd", default=None,
                     help="external command template with {in} and {out}")
    opt.add_argument("--emit-lp", default=None, metavar="FILE",
                     help="also write the generated LP file")
    opt.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")

    val = sub.add_parser("validate", help="parse and check inputs without solving")
    _add_input_args(val)

    exp = sub.add_parser("explain", help="print generated rows by tag prefix")
    _add_input_args(exp)
    exp.add_argument("--tag", default="", help="only rows whose tag starts with this prefix")
    return parser


def _load_problem(args):
    config = parse_configuration(Path(args.config).read_text())
    situation = parse_situation(Path(args.situation).read_text(), config)
    return build_problem(config, situation, base_dir=Path(args.situation).parent)


def _cmd_optimize(args) -> int:
    problem = _load_problem(args)
    if args.emit_lp:
        Path(args.emit_lp).write_text(export_lp(problem.model).text)
    options = SolveOptions(
        backend=args.solver, command=args.solver_cmd, time_limit=args.time_limit
    )
    solution = solve_problem(problem, options)
    if not solution.feasible:
        from .schedule import Schedule

        empty = Schedule(problem.grid, solution.status, float("nan"), {},
                         dict(solution.stats))
        write_schedule(empty, args.out)
        print(f"no schedule: {solution.status}")
        return 2 if solution.status == "infeasible" else 1
    schedule = extract_schedule(problem.model, problem.ledger, solution)
    written = write_schedule(schedule, args.out)
    print(f"{solution.status}: objective {solution.objective:.6f} ct")
    for label, path in sorted(written.items()):
        print(f"{label}: {path}")
    return 0


def _cmd_validate(args) -> int:
    problem = _load_problem(args)
    report = problem.model.validate()
    n_int = sum(1 for v in problem.model.vars if v.domain.is_integral)
    print(f"model ok: {len(problem.model.vars)} variables ({n_int} integer), "
          f"{len(problem.model.constraints)} constraints")
    if report.infeasible_rows:
        for cid, tag in report.infeasible_rows:
            print(f"trivially infeasible row {cid}: {tag}")
        return 1
    return 0


def _cmd_explain(args) -> int:
    problem = _load_problem(args)
    names = {v.id: v.name for v in problem.model.vars}
    for con in problem.model.constraints:
        if not con.tag.startswith(args.tag):
            continue
        terms = " ".join(
            f"{'+' if c >= 0 else '-'} {abs(c):g} {names[vid]}"
            for vid, c in sorted(con.terms.items())
        )
        print(f"[{con.tag}] {terms} {con.sense} {con.rhs:g}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    handler = {"optimize": _cmd_optimize, "validate": _cmd_validate,
               "explain": _cmd_explain}[args.command]
    try:
        return handler(args)
    except BeschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:  # console-script entry point
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
