"""Profile ingestion, scenario configuration and result serialisation.

Config files are YAML with the keys below (paths resolve relative to the
config file)::

    profiles: profiles.csv            # slot,user_id,load_kw,generation_kw
    beta: [0.3, 0.6, 0.1]
    shared_ess: {s_min, s_max, c_max, d_max, eff_charge, eff_discharge, s_init?}
    distributed_ess: [ {...same keys...}, ... ]      # optional, one per user
    cost: {price: 45}                 # or {prices: [...]} or {segments: [[slope, icpt], ...]}
    allow_lossless: false             # optional
    terminal_state_equal: false       # optional
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .scenario import (CostFunction, EssSpec, ProfitCoefficients, Scenario, TimeGrid,
                       UserProfile, split_consistency, validate_scenario)

log = logging.getLogger(__name__)

PROFILE_COLUMNS = ("slot", "user_id", "load_kw", "generation_kw")
SCHEDULE_COLUMNS = ("slot", "user_id", "charge_kw", "discharge_kw", "grid_kw")
TRAJECTORY_COLUMNS = ("slot", "state_kw")
GAIN_DEFINITION = "gain % = 100 * total profit / sum of no-storage baseline costs"


class ProfileError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """Shortest decimal string that reads back to the identical float."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# profiles


def load_profiles(path) -> list[UserProfile]:
    path = Path(path)
    rows: dict[int, dict[int, tuple[float, float, int]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ProfileError(f"{path}: empty file") from None
        missing = [c for c in PROFILE_COLUMNS if c not in header]
        if missing:
            raise ProfileError(f"{path}: header lacks column(s) {', '.join(missing)}")
        col = {c: header.index(c) for c in PROFILE_COLUMNS}
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) < len(header):
                raise ProfileError(f"{path}, row {lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                slot = int(rec[col["slot"]])
                user = int(rec[col["user_id"]])
                load = float(rec[col["load_kw"]])
                gen = float(rec[col["generation_kw"]])
            except ValueError as exc:
                raise ProfileError(f"{path}, row {lineno}: {exc}") from None
            for name, val in (("load_kw", load), ("generation_kw", gen)):
                if not math.isfinite(val):
                    raise ProfileError(f"{path}, row {lineno}: {name} is not finite")
                if val < 0:
                    raise ProfileError(f"{path}, row {lineno}: {name} = {val:g} is negative")
            if slot < 1:
                raise ProfileError(f"{path}, row {lineno}: slot {slot} must be >= 1")
            per_user = rows.setdefault(user, {})
            if slot in per_user:
                raise ProfileError(f"{path}, row {lineno}: duplicate slot {slot} for user {user} "
                                   f"(first at row {per_user[slot][2]})")
            per_user[slot] = (load, gen, lineno)
    if not rows:
        raise ProfileError(f"{path}: no data rows")
    lengths = {}
    for user, slots in sorted(rows.items()):
        n = max(slots)
        gaps = [k for k in range(1, n + 1) if k not in slots]
        if gaps:
            raise ProfileError(f"{path}: user {user} is missing slot {gaps[0]}"
                               + (f" (and {len(gaps) - 1} more)" if len(gaps) > 1 else ""))
        lengths[user] = n
    if len(set(lengths.values())) > 1:
        desc = ", ".join(f"user {u}: {n}" for u, n in lengths.items())
        raise ProfileError(f"{path}: users have different numbers of slots ({desc})")
    out = []
    for user, slots in sorted(rows.items()):
        n = lengths[user]
        load = [slots[k][0] for k in range(1, n + 1)]
        gen = [slots[k][1] for k in range(1, n + 1)]
        out.append(UserProfile(user, gen, load))
    return out


def write_profiles(path, profiles) -> None:
    lines = [PROFILE_COLUMNS]
    for p in profiles:
        for n in range(p.num_slots):
            lines.append((n + 1, p.user_id, fmt(p.load[n]), fmt(p.generation[n])))
    atomic_write_csv(path, lines)


# ---------------------------------------------------------------------------
# config

_ESS_KEYS = ("s_min", "s_max", "c_max", "d_max", "eff_charge", "eff_discharge")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_ess(raw: Any, where: str) -> EssSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = set(raw) - set(_ESS_KEYS) - {"s_init"}
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(sorted(unknown))}")
    vals = {}
    for key in _ESS_KEYS:
        if key not in raw:
            raise ConfigError(f"{where}.{key}: required")
        vals[key] = _number(raw[key], f"{where}.{key}")
    s_init = raw.get("s_init")
    if s_init is not None:
        s_init = _number(s_init, f"{where}.s_init")
    return EssSpec(s_init=s_init, **vals)


def _parse_costs(raw: Any, M: int, N: int):
    if not isinstance(raw, dict):
        raise ConfigError("cost: expected a mapping with one of price, prices, segments")
    given = [k for k in ("price", "prices", "segments") if k in raw]
    if len(given) != 1:
        raise ConfigError("cost: exactly one of price, prices, segments is required")
    kind = given[0]
    if kind == "price":
        f = CostFunction.linear(_number(raw["price"], "cost.price"))
        return tuple(tuple(f for _ in range(N)) for _ in range(M))
    if kind == "segments":
        segs = raw["segments"]
        if not isinstance(segs, list) or not segs:
            raise ConfigError("cost.segments: expected a nonempty list of [slope, intercept]")
        pairs = []
        for k, seg in enumerate(segs):
            if not isinstance(seg, (list, tuple)) or len(seg) != 2:
                raise ConfigError(f"cost.segments[{k}]: expected [slope, intercept]")
            pairs.append((_number(seg[0], f"cost.segments[{k}][0]"),
                          _number(seg[1], f"cost.segments[{k}][1]")))
        f = CostFunction(tuple(pairs))
        return tuple(tuple(f for _ in range(N)) for _ in range(M))
    prices = raw["prices"]
    if not isinstance(prices, list) or not prices:
        raise ConfigError("cost.prices: expected a list")
    if not isinstance(prices[0], list):
        prices = [prices] * M
    if len(prices) != M:
        raise ConfigError(f"cost.prices: {len(prices)} rows for {M} users")
    table = []
    for m, row in enumerate(prices):
        if not isinstance(row, list) or len(row) != N:
            raise ConfigError(f"cost.prices[{m}]: expected {N} prices")
        table.append(tuple(CostFunction.linear(_number(p, f"cost.prices[{m}][{n}]"))
                           for n, p in enumerate(row)))
    return tuple(table)


def scenario_from_mapping(cfg: dict, profiles: list[UserProfile]) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    M = len(profiles)
    N = profiles[0].num_slots
    if "shared_ess" not in cfg:
        raise ConfigError("shared_ess: required")
    shared = _parse_ess(cfg["shared_ess"], "shared_ess")
    dist = None
    if cfg.get("distributed_ess") is not None:
        raw = cfg["distributed_ess"]
        if not isinstance(raw, list):
            raise ConfigError("distributed_ess: expected a list")
        dist = tuple(_parse_ess(r, f"distributed_ess[{k}]") for k, r in enumerate(raw))
    if "cost" not in cfg:
        raise ConfigError("cost: required")
    costs = _parse_costs(cfg["cost"], M, N)
    if cfg.get("beta") is None:
        raise ConfigError("beta required")
    beta = cfg["beta"]
    if not isinstance(beta, list):
        raise ConfigError("beta: expected a list")
    beta = [_number(b, f"beta[{k}]") for k, b in enumerate(beta)]
    flags = {}
    for key in ("allow_lossless", "terminal_state_equal"):
        val = cfg.get(key, False)
        if not isinstance(val, bool):
            raise ConfigError(f"{key}: expected true or false")
        flags[key] = val
    return Scenario(TimeGrid(N), tuple(profiles), shared, costs, ProfitCoefficients(beta),
                    dist, **flags)


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        cfg = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return cfg


def load_config(path, validate: bool = True) -> Scenario:
    """Scenario described by the YAML file at ``path``, joined with its profiles."""
    path = Path(path)
    cfg = read_config_file(path)
    known = {"profiles", "beta", "shared_ess", "distributed_ess", "cost",
             "allow_lossless", "terminal_state_equal", "description"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(sorted(unknown))}")
    if "profiles" not in cfg:
        raise ConfigError("profiles: required")
    prof_path = Path(cfg["profiles"])
    if not prof_path.is_absolute():
        prof_path = path.parent / prof_path
    profiles = load_profiles(prof_path)
    s = scenario_from_mapping(cfg, profiles)
    if validate:
        problems = validate_scenario(s)
        if problems:
            raise ConfigError("; ".join(f"[{p.code}] {p.message}" for p in problems))
    if s.distributed_ess is not None and len(s.distributed_ess) == s.num_users:
        split = split_consistency(s.shared_ess, s.distributed_ess)
        log.info("split_consistency %s (residuals %s)", split.consistent, split.residuals)
    return s


# ---------------------------------------------------------------------------
# output


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_csv(path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow(r)
    atomic_write_text(path, buf.getvalue())


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def schedule_rows(result):
    sched, draw = result.schedule, result.grid_draw.draw
    rows = [SCHEDULE_COLUMNS]
    M, N = sched.shape
    for m in range(M):
        for n in range(N):
            rows.append((n + 1, m + 1, fmt(sched.charge[m, n]), fmt(sched.discharge[m, n]),
                         fmt(draw[m, n])))
    return rows


def trajectory_rows(traj):
    return [TRAJECTORY_COLUMNS] + [(k + 1, fmt(v)) for k, v in enumerate(traj.states)]


def _ess_dict(spec: EssSpec) -> dict:
    return {k: getattr(spec, k) for k in _ESS_KEYS + ("s_init",)}


def result_summary(result, scenario: Scenario) -> dict:
    rep = result.profit_report
    if result.mode.value == "distributed":
        storage = [_ess_dict(e) for e in scenario.distributed_ess]
    else:
        storage = _ess_dict(scenario.shared_ess)
    return {
        "mode": result.mode.value,
        "method": result.method,
        "t_star": result.t_star,
        "total_profit": rep.total_profit,
        "gain_percent": rep.gain_percent,
        "gain_definition": GAIN_DEFINITION,
        "baseline_costs": list(map(float, rep.baseline_costs)),
        "scheduled_costs": list(map(float, rep.scheduled_costs)),
        "profits": list(map(float, rep.profits)),
        "beta": list(map(float, scenario.coefficients.beta)),
        "storage": storage,
        "simultaneous_flags": [list(f) for f in result.simultaneous_flags],
        "lp": [{"status": s.status.value, "iterations": s.iterations,
                "max_primal_residual": s.max_primal_residual, "dual_gap_bound": s.dual_gap_bound}
               for s in result.lp_solutions],
        "bisection_steps": result.bisection_steps,
        "seconds": result.seconds,
    }


def write_result(out_dir, result, scenario: Scenario) -> list[Path]:
    """Schedule, trajectory (one file per unit in distributed mode) and profit report."""
    out = Path(out_dir)
    written = []
    p = out / "schedule.csv"
    atomic_write_csv(p, schedule_rows(result))
    written.append(p)
    if isinstance(result.trajectory, tuple):
        for m, traj in enumerate(result.trajectory):
            p = out / f"trajectory_user_{m + 1}.csv"
            atomic_write_csv(p, trajectory_rows(traj))
            written.append(p)
    else:
        p = out / "trajectory.csv"
        atomic_write_csv(p, trajectory_rows(result.trajectory))
        written.append(p)
    p = out / "profit_report.json"
    atomic_write_text(p, json.dumps(result_summary(result, scenario), indent=2) + "\n")
    written.append(p)
    return written


def read_schedule(path):
    """``(charge, discharge, grid)`` matrices from a schedule CSV."""
    recs = read_csv(path)
    M = max(int(r["user_id"]) for r in recs)
    N = max(int(r["slot"]) for r in recs)
    arrs = {k: np.full((M, N), np.nan) for k in ("charge_kw", "discharge_kw", "grid_kw")}
    for r in recs:
        m, n = int(r["user_id"]) - 1, int(r["slot"]) - 1
        for k in arrs:
            arrs[k][m, n] = float(r[k])
    return arrs["charge_kw"], arrs["discharge_kw"], arrs["grid_kw"]


def read_trajectory(path) -> np.ndarray:
    recs = read_csv(path)
    return np.array([float(r["state_kw"]) for r in sorted(recs, key=lambda r: int(r["slot"]))])


def ess_from_dict(d: dict) -> EssSpec:
    return EssSpec(**{k: float(d[k]) for k in _ESS_KEYS}, s_init=float(d["s_init"]))
