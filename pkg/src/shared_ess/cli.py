"""Command-line entry point: ``shared-ess {solve,compare,sweep,validate}``."""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

from . import data_io, sweeps
from .data_io import ConfigError, ProfileError, atomic_write_csv, atomic_write_text, fmt
from .lp_solver import format_lp
from .scenario import split_consistency, uniform_efficiencies, validate_scenario
from .scheduler import (ScenarioError, SolverError, assemble_shared_program,
                        assemble_unconstrained_program, check_compare_preconditions, compare,
                        solve_distributed, solve_shared, solve_shared_unconstrained)

log = logging.getLogger("shared_ess")

EXIT_OK, EXIT_INPUT, EXIT_SOLVE = 0, 2, 3


def _points(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shared-ess", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one program and write schedule, trajectory, profits")
    p.add_argument("--mode", choices=("shared", "distributed", "unconstrained"), default="shared")
    p.add_argument("--method", choices=("direct", "bisection"), default="direct",
                   help="shared mode only")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--dump-lp", type=Path, help="also write the assembled program as text")

    p = sub.add_parser("compare", help="shared vs distributed comparison table")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--method", choices=("direct", "bisection"), default="direct")

    p = sub.add_parser("sweep", help="profit-coefficient or capacity sweep")
    p.add_argument("--kind", choices=sweeps.KINDS, required=True)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--points", required=True, type=_points,
                   help="comma or space separated sweep values")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--alt-config", type=Path, help="second scenario for --kind diversity")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("validate", help="check a config and its profiles")
    p.add_argument("--config", required=True, type=Path)
    return parser


class _Outputs:
    """Tracks written files so a failed run leaves nothing half-finished behind."""

    def __init__(self, out: Path):
        self.out = out
        self.created_dir = not out.exists()
        self.files: list[Path] = []

    def add(self, paths):
        self.files += list(paths)

    def rollback(self):
        for f in self.files:
            f.unlink(missing_ok=True)
        points = self.out / "points"
        if points.is_dir():
            shutil.rmtree(points, ignore_errors=True)
        if self.created_dir and self.out.is_dir() and not any(self.out.iterdir()):
            self.out.rmdir()


def cmd_solve(args) -> int:
    s = data_io.load_config(args.config)
    outputs = _Outputs(args.out)
    try:
        if args.dump_lp:
            lp = (assemble_shared_program(s) if args.mode == "shared"
                  else assemble_unconstrained_program(s))
            atomic_write_text(args.dump_lp, format_lp(lp))
            outputs.add([args.dump_lp])
        if args.mode == "shared":
            res = solve_shared(s, args.method)
        elif args.mode == "unconstrained":
            res = solve_shared_unconstrained(s)
        else:
            res = solve_distributed(s)
        outputs.add(data_io.write_result(args.out, res, s))
    except BaseException:
        outputs.rollback()
        raise
    rep = res.profit_report
    print(f"mode {res.mode.value}: total profit {rep.total_profit:,.2f} $ "
          f"({rep.gain_percent:.2f}% of baseline {rep.total_baseline:,.2f} $)")
    if res.t_star is not None:
        print(f"t* = {res.t_star:,.4f} $")
    if res.simultaneous_flags:
        print(f"note: {len(res.simultaneous_flags)} slot(s) with simultaneous charge and discharge")
    return EXIT_OK


def cmd_compare(args) -> int:
    s = data_io.load_config(args.config)
    problems = check_compare_preconditions(s)
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_INPUT
    outputs = _Outputs(args.out)
    try:
        rep = compare(s, args.method)
        M = s.num_users
        table = [["mode", "total_profit", "gain_percent"] + [f"profit_user_{m + 1}" for m in range(M)]]
        for mode, total, gain, profits in rep.rows():
            table.append([mode, fmt(total), fmt(gain)] + [fmt(p) for p in profits])
        atomic_write_csv(args.out / "comparison.csv", table)
        outputs.add([args.out / "comparison.csv"])
        summary = {
            "t_star": rep.t_star,
            "total_baseline": rep.total_baseline,
            "shared_gain_percent": rep.shared_gain,
            "unconstrained_gain_percent": rep.unconstrained_gain,
            "distributed_gain_percent": rep.distributed_gain,
            "dominance_margin": rep.dominance_margin,
            "dominance_check": "PASS" if rep.dominance_ok else "FAIL",
            "gain_definition": data_io.GAIN_DEFINITION,
        }
        atomic_write_text(args.out / "comparison.json", json.dumps(summary, indent=2) + "\n")
        outputs.add([args.out / "comparison.json"])
    except BaseException:
        outputs.rollback()
        raise
    print(f"{'mode':<14}{'total profit $':>18}{'gain %':>10}")
    for mode, total, gain, _ in rep.rows():
        print(f"{mode:<14}{total:>18,.2f}{gain:>10.2f}")
    print(f"t* = {rep.t_star:,.4f} $; dominance check {summary['dominance_check']}")
    print(data_io.GAIN_DEFINITION)
    return EXIT_OK if rep.dominance_ok else EXIT_SOLVE


def cmd_sweep(args) -> int:
    s = data_io.load_config(args.config)
    variants = None
    if args.kind == "diversity":
        if args.alt_config is None:
            print("error: --kind diversity needs --alt-config", file=sys.stderr)
            return EXIT_INPUT
        variants = {"alt": data_io.load_config(args.alt_config)}
    spec = sweeps.SweepSpec(args.kind, args.points)
    outputs = _Outputs(args.out)
    try:
        rows = sweeps.run_sweep(s, spec, args.out, args.jobs, variants)
        outputs.add(sweeps.write_sweep(args.out, rows, s.num_users))
    except BaseException:
        outputs.rollback()
        raise
    for r in rows:
        print(f"{r['variant']:>6} point {r['point']:g}: total {r['total_profit']:,.2f} $ "
              f"({r['gain_percent']:.2f}%)")
    return EXIT_OK


def cmd_validate(args) -> int:
    s = data_io.load_config(args.config, validate=False)
    problems = validate_scenario(s)
    for p in problems:
        print(f"[{p.code}] {p.message}")
    ok = not problems
    if s.distributed_ess is not None and len(s.distributed_ess) == s.num_users:
        split = split_consistency(s.shared_ess, s.distributed_ess)
        print(f"split consistency: {'yes' if split else 'NO'} "
              f"(residuals {', '.join(f'{k}={v:g}' for k, v in split.residuals.items())})")
        if not uniform_efficiencies(s.shared_ess, s.distributed_ess):
            print("note: distributed efficiencies differ from the shared unit")
    print(f"{s.num_users} users, {s.num_slots} slots: {'valid' if ok else f'{len(problems)} problem(s)'}")
    return EXIT_OK if ok else EXIT_INPUT


COMMANDS = {"solve": cmd_solve, "compare": cmd_compare, "sweep": cmd_sweep, "validate": cmd_validate}


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ProfileError, ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVE


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
