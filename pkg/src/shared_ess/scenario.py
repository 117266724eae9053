"""Problem-instance data: time grid, user profiles, storage specs, prices and profit shares."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BETA_SUM_TOL = 1e-9
SPLIT_REL_TOL = 1e-9


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    num_slots: int
    # one slot is one unit of time, so kW and kW-per-slot are interchangeable
    slot_duration: float = 1.0


@dataclass(frozen=True, eq=False)
class UserProfile:
    user_id: int
    generation: np.ndarray
    load: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "generation", _frozen_array(self.generation))
        object.__setattr__(self, "load", _frozen_array(self.load))

    @property
    def num_slots(self) -> int:
        return self.load.size


@dataclass(frozen=True, eq=False)
class NetEnergyProfile:
    user_id: int
    net: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "net", _frozen_array(self.net))


@dataclass(frozen=True)
class EssSpec:
    """Storage unit: state window, rate limits and one-way efficiencies (kW, slot = 1)."""

    s_min: float
    s_max: float
    c_max: float
    d_max: float
    eff_charge: float
    eff_discharge: float
    s_init: float | None = None

    def __post_init__(self):
        if self.s_init is None:
            object.__setattr__(self, "s_init", self.s_min)

    def scaled(self, factor: float) -> "EssSpec":
        """Capacity window, initial state and rates multiplied by ``factor``."""
        return EssSpec(self.s_min * factor, self.s_max * factor, self.c_max * factor,
                       self.d_max * factor, self.eff_charge, self.eff_discharge,
                       self.s_init * factor)


@dataclass(frozen=True)
class CostFunction:
    """Convex piecewise-linear price ``f(g) = max_k(slope_k * g + intercept_k)``."""

    segments: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "segments",
                           tuple((float(s), float(i)) for s, i in self.segments))

    @classmethod
    def linear(cls, price: float) -> "CostFunction":
        return cls(((price, 0.0),))

    @property
    def slopes(self) -> np.ndarray:
        return np.array([s for s, _ in self.segments])

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([i for _, i in self.segments])


@dataclass(frozen=True, eq=False)
class ProfitCoefficients:
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", _frozen_array(self.beta))

    def __len__(self):
        return self.beta.size


@dataclass(frozen=True, eq=False)
class Scenario:
    """A complete day-ahead instance.

    ``costs[m][n]`` prices grid draw of user ``m`` in slot ``n`` (both 0-based).
    ``terminal_state_equal`` adds the optional end-of-horizon condition
    ``S_{N+1} = S_1``; ``allow_lossless`` admits efficiencies of exactly 1.
    """

    grid: TimeGrid
    users: tuple[UserProfile, ...]
    shared_ess: EssSpec
    costs: tuple[tuple[CostFunction, ...], ...]
    coefficients: ProfitCoefficients
    distributed_ess: tuple[EssSpec, ...] | None = None
    allow_lossless: bool = False
    terminal_state_equal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "costs", tuple(tuple(row) for row in self.costs))
        if self.distributed_ess is not None:
            object.__setattr__(self, "distributed_ess", tuple(self.distributed_ess))

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_slots(self) -> int:
        return self.grid.num_slots

    def net_profiles(self) -> list[NetEnergyProfile]:
        return [build_net_profile(u) for u in self.users]

    def net_matrix(self) -> np.ndarray:
        return np.vstack([p.net for p in self.net_profiles()])

    def replace(self, **changes) -> "Scenario":
        fields = dict(grid=self.grid, users=self.users, shared_ess=self.shared_ess,
                      costs=self.costs, coefficients=self.coefficients,
                      distributed_ess=self.distributed_ess, allow_lossless=self.allow_lossless,
                      terminal_state_equal=self.terminal_state_equal)
        fields.update(changes)
        return Scenario(**fields)

    def with_beta(self, beta: Sequence[float]) -> "Scenario":
        return self.replace(coefficients=ProfitCoefficients(beta))

    def with_capacity_scale(self, factor: float) -> "Scenario":
        """Shared and distributed units scaled together, keeping the split proportional."""
        dist = None
        if self.distributed_ess is not None:
            dist = tuple(e.scaled(factor) for e in self.distributed_ess)
        return self.replace(shared_ess=self.shared_ess.scaled(factor), distributed_ess=dist)

    def single_user(self, m: int, spec: EssSpec) -> "Scenario":
        """User ``m`` alone with storage ``spec`` (the building block of the distributed case)."""
        return self.replace(users=(self.users[m],), shared_ess=spec, costs=(self.costs[m],),
                            coefficients=ProfitCoefficients([1.0]), distributed_ess=None)


def uniform_costs(price: float, num_users: int, num_slots: int) -> tuple[tuple[CostFunction, ...], ...]:
    f = CostFunction.linear(price)
    return tuple(tuple(f for _ in range(num_slots)) for _ in range(num_users))


def build_net_profile(profile: UserProfile) -> NetEnergyProfile:
    return NetEnergyProfile(profile.user_id, profile.generation - profile.load)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def _check_series(prefix: str, values: np.ndarray, n: int, out: list[Violation]):
    if values.size != n:
        out.append(Violation(f"{prefix}.length", f"{prefix} has {values.size} entries, expected {n}"))
    if not np.all(np.isfinite(values)):
        out.append(Violation(f"{prefix}.nonfinite", f"{prefix} contains non-finite values"))
    elif np.any(values < 0):
        k = int(np.flatnonzero(values < 0)[0])
        out.append(Violation(f"{prefix}.negative", f"{prefix}[{k + 1}] = {values[k]:g} is negative"))


def validate_ess(spec: EssSpec, name: str = "shared_ess", allow_lossless: bool = False) -> list[Violation]:
    out: list[Violation] = []
    vals = (spec.s_min, spec.s_max, spec.s_init, spec.c_max, spec.d_max,
            spec.eff_charge, spec.eff_discharge)
    if not all(math.isfinite(v) for v in vals):
        return [Violation(f"{name}.nonfinite", f"{name} has non-finite fields")]
    if spec.s_min < 0:
        out.append(Violation(f"{name}.s_min", f"{name}: minimum state {spec.s_min:g} is negative"))
    if spec.s_max < spec.s_min:
        out.append(Violation(f"{name}.s_max", f"{name}: capacity {spec.s_max:g} below minimum state {spec.s_min:g}"))
    if spec.s_init < spec.s_min:
        out.append(Violation(f"{name}.s_init", f"{name}: initial state below minimum state"))
    if spec.s_init > spec.s_max:
        out.append(Violation(f"{name}.s_init", f"{name}: initial state above capacity"))
    for label, rate in (("c_max", spec.c_max), ("d_max", spec.d_max)):
        if rate < 0:
            out.append(Violation(f"{name}.{label}", f"{name}: {label} = {rate:g} is negative"))
    for label, eff in (("eff_charge", spec.eff_charge), ("eff_discharge", spec.eff_discharge)):
        lossless = allow_lossless and eff == 1.0
        if not (0.0 < eff < 1.0 or lossless):
            hint = "" if allow_lossless else " (set allow_lossless to admit exactly 1)"
            out.append(Violation(f"{name}.{label}", f"{name}: {label} = {eff:g} outside (0, 1){hint}"))
    return out


def validate_cost(f: CostFunction, name: str) -> list[Violation]:
    out: list[Violation] = []
    if not f.segments:
        return [Violation("cost.empty", f"{name}: cost function has no segments")]
    slopes, icpts = f.slopes, f.intercepts
    if not (np.all(np.isfinite(slopes)) and np.all(np.isfinite(icpts))):
        return [Violation("cost.nonfinite", f"{name}: non-finite segment")]
    if np.any(slopes < 0):
        out.append(Violation("cost.slope", f"{name}: negative slope makes the price decreasing"))
    if icpts.max() != 0.0:
        out.append(Violation("cost.zero_value", f"{name}: cost at zero draw is {icpts.max():g}, must be 0"))
    return out


def validate_scenario(s: Scenario) -> list[Violation]:
    """Every invariant violation in ``s``; an empty list means the scenario is usable."""
    out: list[Violation] = []
    n = s.grid.num_slots
    if not isinstance(n, (int, np.integer)) or n < 1:
        out.append(Violation("grid.num_slots", f"number of slots must be a positive integer, got {n!r}"))
        n = 0
    if s.grid.slot_duration != 1.0:
        out.append(Violation("grid.slot_duration", "slot duration must be exactly 1"))
    m = s.num_users
    if m < 1:
        out.append(Violation("users.empty", "at least one user is required"))
    ids = [u.user_id for u in s.users]
    if len(set(ids)) != len(ids):
        out.append(Violation("users.duplicate_id", "user ids must be unique"))
    for u in s.users:
        _check_series(f"user[{u.user_id}].generation", u.generation, n, out)
        _check_series(f"user[{u.user_id}].load", u.load, n, out)

    out += validate_ess(s.shared_ess, "shared_ess", s.allow_lossless)
    if s.distributed_ess is not None:
        if len(s.distributed_ess) != m:
            out.append(Violation("distributed_ess.count",
                                 f"{len(s.distributed_ess)} distributed units for {m} users"))
        for k, spec in enumerate(s.distributed_ess):
            out += validate_ess(spec, f"distributed_ess[{k}]", s.allow_lossless)

    if len(s.costs) != m or any(len(row) != n for row in s.costs):
        out.append(Violation("cost.shape", f"cost table must be {m} x {n}"))
    else:
        seen = set()
        for i, row in enumerate(s.costs):
            for k, f in enumerate(row):
                if f in seen:
                    continue
                problems = validate_cost(f, f"cost[{i}][{k}]")
                if not problems:
                    seen.add(f)
                out += problems

    beta = s.coefficients.beta
    if beta.size != m:
        out.append(Violation("beta.count", f"{beta.size} profit coefficients for {m} users"))
    if not np.all(np.isfinite(beta)):
        out.append(Violation("beta.nonfinite", "profit coefficients must be finite"))
    else:
        if np.any((beta < 0) | (beta > 1)):
            out.append(Violation("beta.range", "profit coefficients must lie in [0, 1]"))
        total = float(beta.sum())
        if abs(total - 1.0) > BETA_SUM_TOL:
            out.append(Violation("beta.sum", f"coefficients sum {total:g} ≠ 1"))
    return out


@dataclass(frozen=True)
class SplitCheck:
    consistent: bool
    residuals: dict[str, float] = field(default_factory=dict)

    def __bool__(self):
        return self.consistent


def split_consistency(shared: EssSpec, distributed: Sequence[EssSpec]) -> SplitCheck:
    """Whether the distributed units add up to the shared one.

    Residuals are ``sum(distributed) - shared`` for the minimum state, capacity
    and both rate limits; each must vanish to relative tolerance 1e-9.
    """
    if not distributed:
        raise ValueError("distributed list is empty")
    residuals = {}
    ok = True
    for name in ("s_min", "s_max", "c_max", "d_max"):
        target = getattr(shared, name)
        total = math.fsum(getattr(d, name) for d in distributed)
        residuals[name] = total - target
        if abs(total - target) > SPLIT_REL_TOL * max(1.0, abs(target)):
            ok = False
    return SplitCheck(ok, residuals)


def uniform_efficiencies(shared: EssSpec, distributed: Sequence[EssSpec]) -> bool:
    return all(d.eff_charge == shared.eff_charge and d.eff_discharge == shared.eff_discharge
               for d in distributed)


def proportional_split(shared: EssSpec, weights: Sequence[float]) -> tuple[EssSpec, ...]:
    """Distributed units sized in proportion to ``weights`` (normalised to sum 1)."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    return tuple(
        EssSpec(shared.s_min * wi, shared.s_max * wi, shared.c_max * wi, shared.d_max * wi,
                shared.eff_charge, shared.eff_discharge, shared.s_init * wi)
        for wi in w
    )
