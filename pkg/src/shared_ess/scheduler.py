"""Assembly and solution of the shared, shared-unconstrained and distributed programs.

Variable layout of an assembled program (users ``M``, slots ``N``)::

    [t] , C[0,0..N-1], ..., C[M-1,*], D[...], G[...], z[...]

``t`` is present only in the proportional-allocation program.  ``z`` are cost
epigraph variables, ``z >= slope_k * G + intercept_k`` for every price segment.
The storage recursion is eliminated: the state after slot ``tau`` is
``s_init + sum_{n <= tau} (eff_c * sum_m C - sum_m D / eff_d)`` and is bounded
for every ``tau``, including the post-horizon state.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import Executor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import lp_solver
from .costs import GridDrawSchedule, ProfitReport, profit_report, recover_grid_draw
from .lp_solver import LinearProgram, LpSolution, SolverOptions, check_feasibility, solve_lp
from .scenario import (Scenario, split_consistency, uniform_efficiencies,
                       validate_scenario)
from .costs import baseline_cost
from .storage import (FeasibilityReport, Schedule, StateTrajectory, check_feasible,
                      simulate_distributed_state, simulate_shared_state)

log = logging.getLogger(__name__)

SIMULTANEOUS_EPS = 1e-6
ALLOCATION_TOL = 1e-6
DOMINANCE_TOL = 1e-6
_SNAP = 1e-9


class ScenarioError(ValueError):
    """Scenario failed validation or a comparison precondition."""


class SolverError(RuntimeError):
    """The LP core did not certify an answer, or the answer failed its audit."""


class Mode(str, Enum):
    SHARED = "shared"
    SHARED_UNCONSTRAINED = "unconstrained"
    DISTRIBUTED = "distributed"


@dataclass(frozen=True)
class ProgramLayout:
    num_users: int
    num_slots: int
    with_t: bool

    @property
    def block(self) -> int:
        return self.num_users * self.num_slots

    @property
    def offset(self) -> int:
        return 1 if self.with_t else 0

    @property
    def num_vars(self) -> int:
        return self.offset + 4 * self.block

    def index(self, kind: str, m: int, n: int) -> int:
        k = "CDGZ".index(kind)
        return self.offset + k * self.block + m * self.num_slots + n

    def slice(self, kind: str) -> slice:
        k = "CDGZ".index(kind)
        start = self.offset + k * self.block
        return slice(start, start + self.block)

    def names(self) -> tuple[str, ...]:
        out = ["t"] if self.with_t else []
        for kind in "CDGz":
            out += [f"{kind}_{m + 1}_{n + 1}" for m in range(self.num_users)
                    for n in range(self.num_slots)]
        return tuple(out)


def _baselines(s: Scenario) -> np.ndarray:
    return np.array([baseline_cost(s.costs[m], p) for m, p in enumerate(s.net_profiles())])


def _require_valid(s: Scenario):
    problems = validate_scenario(s)
    if problems:
        raise ScenarioError("; ".join(p.message for p in problems))


def _assemble(s: Scenario, with_t: bool, t_fixed: float | None = None) -> LinearProgram:
    M, N = s.num_users, s.num_slots
    lay = ProgramLayout(M, N, with_t)
    nv = lay.num_vars
    spec = s.shared_ess
    net = s.net_matrix()
    nseg = [[len(f.segments) for f in row] for row in s.costs]
    n_epi = int(sum(map(sum, nseg)))
    n_rows = 2 * N + int(s.terminal_state_equal) + M * N + n_epi + (M if with_t else 0)
    A = np.zeros((n_rows, nv))
    rel: list[str] = []
    rhs = np.zeros(n_rows)

    # cumulative state rows
    tri = np.tril(np.ones((N, N)))
    r = 0
    for bound_rel, bound in ((lp_solver.LE, spec.s_max), (lp_solver.GE, spec.s_min)):
        rows = slice(r, r + N)
        for m in range(M):
            c0 = lay.index("C", m, 0)
            d0 = lay.index("D", m, 0)
            A[rows, c0:c0 + N] = spec.eff_charge * tri
            A[rows, d0:d0 + N] = -tri / spec.eff_discharge
        rhs[rows] = bound - spec.s_init
        rel += [bound_rel] * N
        r += N
    if s.terminal_state_equal:
        A[r] = A[N - 1]
        rel.append(lp_solver.EQ)
        rhs[r] = 0.0
        r += 1

    # load balance: G - C + D >= -delta
    for m in range(M):
        for n in range(N):
            A[r, lay.index("G", m, n)] = 1.0
            A[r, lay.index("C", m, n)] = -1.0
            A[r, lay.index("D", m, n)] = 1.0
            rhs[r] = -net[m, n]
            rel.append(lp_solver.GE)
            r += 1

    # cost epigraph: z - slope * G >= intercept
    for m in range(M):
        for n in range(N):
            zi, gi = lay.index("Z", m, n), lay.index("G", m, n)
            for slope, icpt in s.costs[m][n].segments:
                A[r, zi] = 1.0
                A[r, gi] = -slope
                rhs[r] = icpt
                rel.append(lp_solver.GE)
                r += 1

    lower = np.zeros(nv)
    upper = np.full(nv, np.inf)
    upper[lay.slice("C")] = spec.c_max
    upper[lay.slice("D")] = spec.d_max
    objective = np.zeros(nv)

    if with_t:
        # allocation rows: baseline_m - sum_n z_mn >= beta_m * t
        base = _baselines(s)
        for m in range(M):
            z0 = lay.index("Z", m, 0)
            A[r, z0:z0 + N] = -1.0
            A[r, 0] = -s.coefficients.beta[m]
            rhs[r] = -base[m]
            rel.append(lp_solver.GE)
            r += 1
        if t_fixed is None:
            objective[0] = 1.0
        else:
            lower[0] = upper[0] = t_fixed
    else:
        objective[lay.slice("Z")] = -1.0
    assert r == n_rows
    return LinearProgram(objective, lower, upper, A, tuple(rel), rhs, lay.names())


def assemble_shared_program(s: Scenario) -> LinearProgram:
    """Proportional-allocation program: maximise ``t`` with ``P_m >= beta_m t``."""
    _require_valid(s)
    return _assemble(s, with_t=True)


def assemble_feasibility_program(s: Scenario, t: float) -> LinearProgram:
    """Constraints of the shared program with ``t`` pinned; zero objective."""
    _require_valid(s)
    return _assemble(s, with_t=True, t_fixed=t)


def assemble_unconstrained_program(s: Scenario) -> LinearProgram:
    """Total-profit program without allocation rows; objective omits the baseline constant."""
    _require_valid(s)
    return _assemble(s, with_t=False)


@dataclass
class ScheduleResult:
    mode: Mode
    schedule: Schedule
    grid_draw: GridDrawSchedule
    trajectory: StateTrajectory | tuple[StateTrajectory, ...]
    profit_report: ProfitReport
    feasibility: FeasibilityReport
    t_star: float | None = None
    simultaneous_flags: list[tuple[int, int]] = field(default_factory=list)
    lp_solutions: list[LpSolution] = field(default_factory=list)
    method: str = "direct"
    bisection_steps: int = 0
    seconds: float = 0.0

    @property
    def total_profit(self) -> float:
        return self.profit_report.total_profit

    @property
    def profits(self) -> np.ndarray:
        return self.profit_report.profits


def _snap(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    v = values.copy()
    v[(v < lo) & (v >= lo - _SNAP)] = lo
    v[(v > hi) & (v <= hi + _SNAP)] = hi
    return v


def _extract(x: np.ndarray, lay: ProgramLayout, c_max: float, d_max: float):
    shape = (lay.num_users, lay.num_slots)
    C = _snap(x[lay.slice("C")].reshape(shape), 0.0, c_max)
    D = _snap(x[lay.slice("D")].reshape(shape), 0.0, d_max)
    return C, D


def _simultaneous(sched: Schedule) -> list[tuple[int, int]]:
    both = (sched.charge > SIMULTANEOUS_EPS) & (sched.discharge > SIMULTANEOUS_EPS)
    return [(int(m) + 1, int(n) + 1) for m, n in zip(*np.nonzero(both))]


def _certified(sol: LpSolution, what: str) -> LpSolution:
    if sol.status is not lp_solver.Status.OPTIMAL:
        raise SolverError(f"{what}: solver returned {sol.status.value} ({sol.message})")
    return sol


def _finish_shared(s: Scenario, mode: Mode, sched: Schedule, t_star, sols, method, steps, t0):
    deltas = s.net_profiles()
    report = profit_report(s.costs, deltas, sched)
    traj = simulate_shared_state(s.shared_ess, sched)
    audit = check_feasible(s.shared_ess, sched, "shared")
    if not audit.feasible:
        raise SolverError(f"{mode.value} schedule fails the bounds audit: {audit.violations[:3]}")
    if s.terminal_state_equal and abs(traj.states[-1] - traj.states[0]) > 1e-7:
        raise SolverError("terminal state differs from initial state")
    if t_star is not None:
        beta = s.coefficients.beta
        short = report.profits - beta * t_star
        if np.any(short < -ALLOCATION_TOL):
            raise SolverError(f"allocation violated by {-short.min():.3g}")
    return ScheduleResult(mode, sched, recover_grid_draw(sched, deltas), traj, report, audit,
                          t_star, _simultaneous(sched), sols, method, steps,
                          time.perf_counter() - t0)


def solve_shared(s: Scenario, method: str = "direct", options: SolverOptions | None = None) -> ScheduleResult:
    """Maximise the allocated total ``t`` on the shared unit.

    ``method="direct"`` treats ``t`` as a decision variable; ``"bisection"``
    searches ``t`` over ``[0, sum of baselines]`` with a feasibility program at
    each step, to tolerance ``1e-6 * (1 + upper end)``, then narrows the final
    bracket to ``1e-6 * (1 + t)``.
    """
    _require_valid(s)
    t0 = time.perf_counter()
    lay = ProgramLayout(s.num_users, s.num_slots, True)
    spec = s.shared_ess
    if method == "direct":
        sol = _certified(solve_lp(_assemble(s, True), options), "shared program")
        t_star = max(0.0, float(sol.primal[0]))
        C, D = _extract(sol.primal, lay, spec.c_max, spec.d_max)
        return _finish_shared(s, Mode.SHARED, Schedule(C, D), t_star, [sol], method, 0, t0)
    if method != "bisection":
        raise ValueError(f"unknown method {method!r}")

    points: dict[float, np.ndarray] = {}
    verdicts: dict[float, bool] = {}
    deltas = s.net_profiles()

    def feasible_at(t: float) -> bool:
        if t in verdicts:
            return verdicts[t]
        res = check_feasibility(_assemble(s, True, t_fixed=t), options)
        if res.status is lp_solver.Status.NUMERICAL_ERROR:
            raise SolverError(f"feasibility check at t={t:g} broke down")
        ok = res.feasible
        if ok:
            # accept only if the recomputed profits honour the allocation; a
            # point inside the LP tolerance can still miss it once cost slopes
            # amplify the grid-draw residuals
            C, D = _extract(res.point, lay, spec.c_max, spec.d_max)
            prof = profit_report(s.costs, deltas, Schedule(C, D)).profits
            ok = bool(np.all(prof - s.coefficients.beta * t >= -0.5 * ALLOCATION_TOL))
            points[t] = res.point
        verdicts[t] = ok
        return ok

    t_hi = float(_baselines(s).sum())
    tol = 1e-6 * (1.0 + t_hi)
    t_star = lp_solver.bisect_max(feasible_at, 0.0, t_hi, tol)
    # the bracket-wide tolerance can be coarse when t* is far below the
    # baseline total; finish the search relative to t* itself
    fine = 1e-6 * (1.0 + t_star)
    rejected = [t for t, ok in verdicts.items() if not ok]
    if rejected and min(rejected) - t_star > fine:
        t_star = lp_solver.bisect_max(feasible_at, t_star, min(rejected), fine)
    steps = len(verdicts)
    C, D = _extract(points[t_star], lay, spec.c_max, spec.d_max)
    # report the level the schedule actually delivers; with a tiny coefficient
    # the LP tolerance alone would allow t to sit well above it
    beta = s.coefficients.beta
    prof = profit_report(s.costs, deltas, Schedule(C, D)).profits
    pos = beta > 0
    if pos.any():
        t_star = max(0.0, min(t_star, float(np.min(prof[pos] / beta[pos]))))
    return _finish_shared(s, Mode.SHARED, Schedule(C, D), t_star, [], method, steps, t0)


def solve_shared_unconstrained(s: Scenario, options: SolverOptions | None = None) -> ScheduleResult:
    _require_valid(s)
    t0 = time.perf_counter()
    lay = ProgramLayout(s.num_users, s.num_slots, False)
    sol = _certified(solve_lp(_assemble(s, False), options), "unconstrained program")
    C, D = _extract(sol.primal, lay, s.shared_ess.c_max, s.shared_ess.d_max)
    return _finish_shared(s, Mode.SHARED_UNCONSTRAINED, Schedule(C, D), None, [sol],
                          "direct", 0, t0)


def _solve_one_user(s: Scenario, m: int, options):
    sub = s.single_user(m, s.distributed_ess[m])
    lay = ProgramLayout(1, s.num_slots, False)
    sol = _certified(solve_lp(_assemble(sub, False), options), f"distributed program, user {m + 1}")
    spec = s.distributed_ess[m]
    C, D = _extract(sol.primal, lay, spec.c_max, spec.d_max)
    return C[0], D[0], sol


def solve_distributed(s: Scenario, options: SolverOptions | None = None,
                      executor: Executor | None = None) -> ScheduleResult:
    """Each user maximises its own profit on its own unit; no energy crosses users."""
    _require_valid(s)
    if s.distributed_ess is None:
        raise ScenarioError("scenario has no distributed storage units")
    t0 = time.perf_counter()
    users = range(s.num_users)
    if executor is None:
        parts = [_solve_one_user(s, m, options) for m in users]
    else:
        parts = list(executor.map(lambda m: _solve_one_user(s, m, options), users))
    sched = Schedule(np.vstack([p[0] for p in parts]), np.vstack([p[1] for p in parts]))
    deltas = s.net_profiles()
    report = profit_report(s.costs, deltas, sched)
    trajs = tuple(simulate_distributed_state(s.distributed_ess[m], sched.charge[m], sched.discharge[m])
                  for m in users)
    audit = check_feasible(s.distributed_ess, sched, "distributed")
    if not audit.feasible:
        raise SolverError(f"distributed schedule fails the bounds audit: {audit.violations[:3]}")
    return ScheduleResult(Mode.DISTRIBUTED, sched, recover_grid_draw(sched, deltas), trajs, report,
                          audit, None, _simultaneous(sched), [p[2] for p in parts], "direct", 0,
                          time.perf_counter() - t0)


@dataclass
class ComparisonReport:
    shared: ScheduleResult
    unconstrained: ScheduleResult
    distributed: ScheduleResult
    total_baseline: float

    @property
    def t_star(self) -> float:
        return self.shared.t_star

    def gain(self, result: ScheduleResult) -> float:
        return 100.0 * result.total_profit / self.total_baseline if self.total_baseline > 0 else 0.0

    @property
    def shared_gain(self) -> float:
        return self.gain(self.shared)

    @property
    def unconstrained_gain(self) -> float:
        return self.gain(self.unconstrained)

    @property
    def distributed_gain(self) -> float:
        return self.gain(self.distributed)

    @property
    def dominance_margin(self) -> float:
        return self.unconstrained.total_profit - self.distributed.total_profit

    @property
    def dominance_ok(self) -> bool:
        return self.dominance_margin >= -DOMINANCE_TOL

    def rows(self):
        """(mode, total profit, gain %, per-user profits) for each solved mode."""
        for res in (self.shared, self.unconstrained, self.distributed):
            yield res.mode.value, res.total_profit, self.gain(res), list(res.profits)


def check_compare_preconditions(s: Scenario) -> list[str]:
    problems = [v.message for v in validate_scenario(s)]
    if s.distributed_ess is None:
        return problems + ["scenario has no distributed storage units"]
    if len(s.distributed_ess) == s.num_users:
        split = split_consistency(s.shared_ess, s.distributed_ess)
        if not split:
            bad = {k: v for k, v in split.residuals.items() if v}
            problems.append(f"distributed units do not sum to the shared unit: {bad}")
        if not uniform_efficiencies(s.shared_ess, s.distributed_ess):
            problems.append("distributed and shared efficiencies differ")
    return problems


def compare(s: Scenario, method: str = "direct", options: SolverOptions | None = None) -> ComparisonReport:
    problems = check_compare_preconditions(s)
    if problems:
        raise ScenarioError("; ".join(problems))
    shared = solve_shared(s, method, options)
    unconstrained = solve_shared_unconstrained(s, options)
    distributed = solve_distributed(s, options)
    rep = ComparisonReport(shared, unconstrained, distributed, shared.profit_report.total_baseline)
    if not rep.dominance_ok:
        log.error("dominance check FAILED: shared %.6g < distributed %.6g",
                  unconstrained.total_profit, distributed.total_profit)
    return rep
