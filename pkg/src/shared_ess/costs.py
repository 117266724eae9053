"""Grid-purchase costs, no-storage baseline, grid-draw recovery and user profits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scenario import CostFunction, NetEnergyProfile
from .storage import Schedule


def eval_cost(f: CostFunction, g: float) -> float:
    if g < 0:
        raise ValueError(f"grid draw must be nonnegative, got {g!r}")
    return max(slope * g + icpt for slope, icpt in f.segments)


def baseline_cost(user_costs: Sequence[CostFunction], delta: NetEnergyProfile) -> float:
    """Cost of covering every deficit slot from the grid: ``sum_n f_n([-delta_n]^+)``."""
    net = delta.net
    if len(user_costs) != net.size:
        raise ValueError("cost series and net profile differ in length")
    return math.fsum(eval_cost(f, max(0.0, -x)) for f, x in zip(user_costs, net))


@dataclass(frozen=True, eq=False)
class GridDrawSchedule:
    draw: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.array(self.draw, dtype=float))
        g.setflags(write=False)
        object.__setattr__(self, "draw", g)


def recover_grid_draw(sched: Schedule, deltas: Sequence[NetEnergyProfile]) -> GridDrawSchedule:
    """Smallest nonnegative draw meeting the load: ``[C - D - delta]^+``."""
    net = np.vstack([d.net for d in deltas])
    if net.shape != sched.shape:
        raise ValueError(f"net profiles {net.shape} do not match schedule {sched.shape}")
    return GridDrawSchedule(np.maximum(0.0, sched.charge - sched.discharge - net))


def scheduled_cost(user_costs: Sequence[CostFunction], draw_row) -> float:
    return math.fsum(eval_cost(f, float(g)) for f, g in zip(user_costs, draw_row))


def user_profit(user_costs: Sequence[CostFunction], delta: NetEnergyProfile, c_row, d_row) -> float:
    c = np.asarray(c_row, dtype=float)
    d = np.asarray(d_row, dtype=float)
    draw = np.maximum(0.0, c - d - delta.net)
    return baseline_cost(user_costs, delta) - scheduled_cost(user_costs, draw)


@dataclass(frozen=True, eq=False)
class ProfitReport:
    baseline_costs: np.ndarray
    scheduled_costs: np.ndarray
    profits: np.ndarray
    total_profit: float

    @property
    def total_baseline(self) -> float:
        return float(math.fsum(self.baseline_costs))

    @property
    def gain_percent(self) -> float:
        """Total profit as a percentage of the summed no-storage cost."""
        base = self.total_baseline
        return 100.0 * self.total_profit / base if base > 0 else 0.0


def profit_report(costs: Sequence[Sequence[CostFunction]], deltas: Sequence[NetEnergyProfile],
                  sched: Schedule) -> ProfitReport:
    draw = recover_grid_draw(sched, deltas).draw
    base = np.array([baseline_cost(costs[m], deltas[m]) for m in range(len(deltas))])
    used = np.array([scheduled_cost(costs[m], draw[m]) for m in range(len(deltas))])
    profits = base - used
    return ProfitReport(base, used, profits, math.fsum(profits))
