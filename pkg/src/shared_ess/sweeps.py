"""Parameter sweeps: profit-coefficient sweep, storage-capacity sweep, generation-diversity pair."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .data_io import atomic_write_csv, atomic_write_text, fmt
from .scenario import Scenario, validate_scenario
from .scheduler import ScenarioError, solve_distributed, solve_shared

log = logging.getLogger(__name__)

KINDS = ("beta", "capacity", "diversity")


@dataclass(frozen=True)
class SweepSpec:
    """``beta``: points are values of the second user's coefficient, the first
    user's stays fixed and the third takes the remainder.  ``capacity`` and
    ``diversity``: points are shared capacities in kW, with rates and the
    distributed split scaled in proportion."""

    kind: str
    points: tuple[float, ...]


def beta_point(s: Scenario, beta2: float) -> Scenario:
    if s.num_users != 3:
        raise ScenarioError("beta sweep needs exactly three users")
    b1 = float(s.coefficients.beta[0])
    return s.with_beta([b1, beta2, 1.0 - b1 - beta2])


def capacity_point(s: Scenario, s_max: float) -> Scenario:
    if s.shared_ess.s_max <= 0:
        raise ScenarioError("capacity sweep needs a positive base capacity")
    return s.with_capacity_scale(s_max / s.shared_ess.s_max)


def expand(s: Scenario, spec: SweepSpec, variants: dict[str, Scenario] | None = None):
    """``(label, point, scenario)`` per sweep point, every scenario validated up front."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown sweep kind {spec.kind!r}")
    out = []
    if spec.kind == "beta":
        out = [("base", p, beta_point(s, p)) for p in spec.points]
    elif spec.kind == "capacity":
        out = [("base", p, capacity_point(s, p)) for p in spec.points]
    else:
        variants = variants or {}
        if not variants:
            raise ScenarioError("diversity comparison needs a second scenario variant")
        for label, base in (("base", s), *variants.items()):
            out += [(label, p, capacity_point(base, p)) for p in spec.points]
    for label, p, sc in out:
        problems = validate_scenario(sc)
        if problems:
            raise ScenarioError(f"sweep point {p:g} ({label}): " + "; ".join(v.message for v in problems))
    return out


def run_point(label: str, point: float, s: Scenario, with_distributed: bool) -> dict:
    res = solve_shared(s)
    row = {
        "variant": label,
        "point": point,
        "t_star": res.t_star,
        "total_profit": res.total_profit,
        "gain_percent": res.profit_report.gain_percent,
        "profits": [float(p) for p in res.profits],
        "allocated": [float(b * res.t_star) for b in s.coefficients.beta],
    }
    if with_distributed and s.distributed_ess is not None:
        dist = solve_distributed(s)
        row["distributed_total"] = dist.total_profit
        row["distributed_gain_percent"] = dist.profit_report.gain_percent
    return row


def _run_star(args):
    return run_point(*args)


def run_sweep(s: Scenario, spec: SweepSpec, out_dir=None, jobs: int = 1,
              variants: dict[str, Scenario] | None = None) -> list[dict]:
    """Solve every sweep point (concurrently when ``jobs > 1``) and return rows in input order."""
    points = expand(s, spec, variants)
    with_dist = spec.kind != "beta"
    tasks = [(label, p, sc, with_dist) for label, p, sc in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_star, tasks))
    else:
        rows = [_run_star(t) for t in tasks]
    if out_dir is not None:
        out = Path(out_dir)
        for k, row in enumerate(rows):
            atomic_write_text(out / "points" / f"point_{k:03d}.json", json.dumps(row, indent=2) + "\n")
    return rows


def sweep_table(rows: Sequence[dict], num_users: int):
    """Rows for the plot-ready ``point,total_profit,profit_user_1..M`` file."""
    header = ["point", "total_profit"] + [f"profit_user_{m + 1}" for m in range(num_users)]
    multi = len({r["variant"] for r in rows}) > 1
    if multi:
        header.insert(0, "variant")
    table = [header]
    for r in rows:
        line = [fmt(r["point"]), fmt(r["total_profit"])] + [fmt(p) for p in r["profits"]]
        table.append(([r["variant"]] if multi else []) + line)
    return table


def detail_table(rows: Sequence[dict], num_users: int):
    header = ["variant", "point", "t_star", "total_profit", "gain_percent",
              "distributed_total", "distributed_gain_percent"]
    header += [f"allocated_user_{m + 1}" for m in range(num_users)]
    table = [header]
    for r in rows:
        table.append([r["variant"], fmt(r["point"]), fmt(r["t_star"]), fmt(r["total_profit"]),
                      fmt(r["gain_percent"]),
                      fmt(r["distributed_total"]) if "distributed_total" in r else "",
                      fmt(r["distributed_gain_percent"]) if "distributed_gain_percent" in r else ""]
                     + [fmt(a) for a in r["allocated"]])
    return table


def write_sweep(out_dir, rows: Sequence[dict], num_users: int) -> list[Path]:
    out = Path(out_dir)
    atomic_write_csv(out / "sweep.csv", sweep_table(rows, num_users))
    atomic_write_csv(out / "sweep_detail.csv", detail_table(rows, num_users))
    return [out / "sweep.csv", out / "sweep_detail.csv"]
