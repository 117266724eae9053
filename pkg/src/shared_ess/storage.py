"""Storage state recursions and schedule feasibility checks.

Nothing here clamps: an infeasible schedule yields an out-of-range trajectory
together with a report, so solver output can be audited independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

import numpy as np

from .scenario import EssSpec

FEAS_TOL = 1e-7


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Schedule:
    """Charge and discharge energies, both shaped ``(users, slots)``."""

    charge: np.ndarray
    discharge: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.array(self.charge, dtype=float))
        d = np.atleast_2d(np.array(self.discharge, dtype=float))
        if c.shape != d.shape:
            raise DimensionError(f"charge {c.shape} and discharge {d.shape} differ in shape")
        c.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "charge", c)
        object.__setattr__(self, "discharge", d)

    @property
    def shape(self) -> tuple[int, int]:
        return self.charge.shape

    @classmethod
    def zeros(cls, num_users: int, num_slots: int) -> "Schedule":
        z = np.zeros((num_users, num_slots))
        return cls(z, z)

    def row(self, m: int) -> "Schedule":
        return Schedule(self.charge[m:m + 1], self.discharge[m:m + 1])


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """``states[k]`` is the stored energy at the start of slot ``k + 1``; length N + 1."""

    states: np.ndarray

    def __post_init__(self):
        s = np.array(self.states, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def __len__(self):
        return self.states.size


def _trajectory(s_init, eff_c, eff_d, charge_total, discharge_total) -> StateTrajectory:
    steps = eff_c * charge_total - discharge_total / eff_d
    # plain left fold, so states match the slot-by-slot recursion bit for bit
    return StateTrajectory(list(accumulate(steps.tolist(), initial=float(s_init))))


def simulate_shared_state(spec: EssSpec, sched: Schedule, num_slots: int | None = None) -> StateTrajectory:
    """Shared unit: every user's charge and discharge moves one common state."""
    if num_slots is not None and sched.shape[1] != num_slots:
        raise DimensionError(f"schedule has {sched.shape[1]} slots, expected {num_slots}")
    return _trajectory(spec.s_init, spec.eff_charge, spec.eff_discharge,
                       sched.charge.sum(axis=0), sched.discharge.sum(axis=0))


def simulate_distributed_state(spec_m: EssSpec, charge_row, discharge_row,
                               num_slots: int | None = None) -> StateTrajectory:
    c = np.asarray(charge_row, dtype=float).ravel()
    d = np.asarray(discharge_row, dtype=float).ravel()
    if c.size != d.size or (num_slots is not None and c.size != num_slots):
        raise DimensionError(f"rows of length {c.size}/{d.size} do not match")
    return _trajectory(spec_m.s_init, spec_m.eff_charge, spec_m.eff_discharge, c, d)


@dataclass(frozen=True)
class BoundViolation:
    kind: str       # "state_above", "state_below", "charge_rate", "discharge_rate", "negative"
    slot: int       # 1-based; for states, k means S_k
    user: int | None
    magnitude: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[BoundViolation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.feasible

    def worst(self) -> float:
        return max((v.magnitude for v in self.violations), default=0.0)


def _state_violations(spec: EssSpec, traj: StateTrajectory, user, tol, out):
    s = traj.states
    for k in np.flatnonzero(s > spec.s_max + tol):
        out.append(BoundViolation("state_above", int(k) + 1, user, float(s[k] - spec.s_max)))
    for k in np.flatnonzero(s < spec.s_min - tol):
        out.append(BoundViolation("state_below", int(k) + 1, user, float(spec.s_min - s[k])))


def _rate_violations(c, d, c_max, d_max, users, tol, out):
    for kind, arr, cap in (("charge_rate", c, c_max), ("discharge_rate", d, d_max)):
        for i, n in zip(*np.nonzero(arr > cap[:, None] + tol)):
            out.append(BoundViolation(kind, int(n) + 1, users[i], float(arr[i, n] - cap[i])))
        for i, n in zip(*np.nonzero(arr < -tol)):
            out.append(BoundViolation("negative", int(n) + 1, users[i], float(-arr[i, n])))
        bad = ~np.isfinite(arr)
        for i, n in zip(*np.nonzero(bad)):
            out.append(BoundViolation("nonfinite", int(n) + 1, users[i], float("inf")))


def check_feasible(specs: EssSpec | Sequence[EssSpec], sched: Schedule, mode: str = "shared",
                   tol: float = FEAS_TOL) -> FeasibilityReport:
    """Bounds audit of ``sched``; ``mode`` is ``"shared"`` or ``"distributed"``.

    All N + 1 states are checked, the post-horizon one included.
    """
    out: list[BoundViolation] = []
    M = sched.shape[0]
    users = list(range(1, M + 1))
    if mode == "shared":
        spec = specs if isinstance(specs, EssSpec) else specs[0]
        _rate_violations(sched.charge, sched.discharge, np.full(M, spec.c_max),
                         np.full(M, spec.d_max), users, tol, out)
        _state_violations(spec, simulate_shared_state(spec, sched), None, tol, out)
    elif mode == "distributed":
        specs = list(specs)
        if len(specs) != M:
            raise DimensionError(f"{len(specs)} storage specs for {M} schedule rows")
        _rate_violations(sched.charge, sched.discharge, np.array([s.c_max for s in specs]),
                         np.array([s.d_max for s in specs]), users, tol, out)
        for i, spec in enumerate(specs):
            traj = simulate_distributed_state(spec, sched.charge[i], sched.discharge[i])
            _state_violations(spec, traj, i + 1, tol, out)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return FeasibilityReport(tuple(out))
