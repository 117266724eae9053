"""The nine acceptance criteria, each at its stated tolerance.

Suites 1 and 2 are generated from fixed seeds and solved once per module;
each criterion test records a one-line verdict that is printed in the
terminal summary (and immediately when run with ``-s``).
"""

import time

import numpy as np
import pytest
from oracles import (highs_optimum, lattice_bound, lattice_optimum, random_dominance_scenario,
                     random_lattice_instance)

from shared_ess.costs import profit_report
from shared_ess.data_io import load_config
from shared_ess.fixture import fixture_config
from shared_ess.lp_solver import Status
from shared_ess.scenario import split_consistency, uniform_efficiencies
from shared_ess.scheduler import (assemble_shared_program, assemble_unconstrained_program,
                                  solve_distributed, solve_shared, solve_shared_unconstrained)
from shared_ess.storage import check_feasible
from shared_ess.sweeps import SweepSpec, expand

SUITE1_SIZE = 200
SUITE2_SIZE = 500
AUDIT_TOL = 1e-7


def record(verdicts, key, ok, text):
    verdicts[key] = (bool(ok), text)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {text}")


# ---------------------------------------------------------------------------
# shared data


class Emitted:
    """Every schedule and LP solution produced across the suites."""

    def __init__(self):
        self.schedules = []      # (scenario, ScheduleResult)
        self.programs = []       # (LinearProgram, LpSolution)

    def add(self, s, res):
        self.schedules.append((s, res))
        if res.lp_solutions:
            if res.mode.value == "distributed":
                lps = [assemble_unconstrained_program(s.single_user(m, s.distributed_ess[m]))
                       for m in range(s.num_users)]
            elif res.mode.value == "shared":
                lps = [assemble_shared_program(s)]
            else:
                lps = [assemble_unconstrained_program(s)]
            self.programs += list(zip(lps, res.lp_solutions))
        return res


@pytest.fixture(scope="module")
def emitted():
    return Emitted()


@pytest.fixture(scope="module")
def suite1(emitted):
    rng = np.random.default_rng(20240601)
    rows, t_oracle = [], 0.0
    t0 = time.perf_counter()
    for _ in range(SUITE1_SIZE):
        inst = random_lattice_instance(rng)
        s = inst.scenario()
        t1 = time.perf_counter()
        direct = emitted.add(s, solve_shared(s))
        unc = emitted.add(s, solve_shared_unconstrained(s))
        lat_t, lat_total = lattice_optimum(inst)
        t_oracle += time.perf_counter() - t1
        bis = emitted.add(s, solve_shared(s, "bisection"))
        rows.append(dict(inst=inst, s=s, direct=direct, unc=unc, bis=bis,
                         lat_t=lat_t, lat_total=lat_total))
    return dict(rows=rows, oracle_seconds=t_oracle, seconds=time.perf_counter() - t0)


@pytest.fixture(scope="module")
def suite2(emitted):
    rng = np.random.default_rng(7)
    rows = []
    t0 = time.perf_counter()
    for _ in range(SUITE2_SIZE):
        s = random_dominance_scenario(rng)
        unc = emitted.add(s, solve_shared_unconstrained(s))
        dist = emitted.add(s, solve_distributed(s))
        rows.append(dict(s=s, unc=unc, dist=dist))
    elapsed = time.perf_counter() - t0
    for r in rows:
        r["shared"] = emitted.add(r["s"], solve_shared(r["s"]))
    return dict(rows=rows, seconds=elapsed)


@pytest.fixture(scope="module")
def fixture_scenario():
    return load_config(fixture_config())


# ---------------------------------------------------------------------------
# criteria


def test_1_oracle_equivalence(suite1, verdicts):
    worst, bad = 0.0, []
    for k, r in enumerate(suite1["rows"]):
        inst = r["inst"]
        for lp_val, lat, alloc in ((r["direct"].t_star, r["lat_t"], True),
                                   (r["unc"].total_profit, r["lat_total"], False)):
            bound = lattice_bound(inst, alloc)
            gap = lp_val - lat
            worst = max(worst, gap / bound)
            if not (-1e-6 <= gap <= bound):
                bad.append((k, "t*" if alloc else "total", lp_val, lat, bound))
        # an independent LP code on the same program
        ref = highs_optimum(assemble_shared_program(r["s"]))[1]
        if abs(ref - r["direct"].t_star) > 1e-6 * (1 + abs(ref)):
            bad.append((k, "highs", r["direct"].t_star, ref, 0.0))
    secs = suite1["oracle_seconds"]
    ok = not bad and len(suite1["rows"]) >= 200 and secs < 120
    record(verdicts, 1, ok, f"oracle equivalence: {len(suite1['rows'])} lattice instances, "
           f"{len(bad)} mismatches, largest gap {worst:.3f} of the step bound, {secs:.1f} s")
    assert not bad, bad[:5]
    assert secs < 120


def test_2_dominance(suite2, verdicts):
    rows = suite2["rows"]
    for r in rows:
        assert split_consistency(r["s"].shared_ess, r["s"].distributed_ess)
        assert uniform_efficiencies(r["s"].shared_ess, r["s"].distributed_ess)
    margins = np.array([r["unc"].total_profit - r["dist"].total_profit for r in rows])
    violations = int(np.sum(margins < -1e-6))
    secs = suite2["seconds"]
    ok = violations == 0 and len(rows) >= 500 and secs < 300
    record(verdicts, 2, ok, f"dominance: {len(rows)} instances, {violations} violations, "
           f"smallest margin {margins.min():.3g}, {secs:.1f} s")
    assert violations == 0
    assert secs < 300


def test_3_allocation_and_sandwich(suite1, suite2, verdicts):
    checked, bad = 0, []
    pairs = [(r["s"], r[key], r["unc"]) for r in suite1["rows"] for key in ("direct", "bis")]
    pairs += [(r["s"], r["shared"], r["unc"]) for r in suite2["rows"]]
    for s, res, unc in pairs:
        prof = profit_report(s.costs, s.net_profiles(), res.schedule).profits
        short = prof - s.coefficients.beta * res.t_star
        if short.min() < -1e-6 or not (0 <= res.t_star <= unc.total_profit + 1e-6):
            bad.append((res.t_star, short.min(), unc.total_profit))
        checked += 1
    record(verdicts, 3, not bad, f"allocation and sandwich: {checked} shared solutions, "
           f"{len(bad)} failures")
    assert not bad, bad[:5]


def test_4_method_agreement(suite1, fixture_scenario, verdicts):
    diffs = [abs(r["direct"].t_star - r["bis"].t_star) / (1 + r["direct"].t_star)
             for r in suite1["rows"]]
    a = solve_shared(fixture_scenario)
    b = solve_shared(fixture_scenario, "bisection")
    fix = abs(a.t_star - b.t_star) / (1 + a.t_star)
    ok = max(diffs) <= 1e-5 and fix <= 1e-5
    record(verdicts, 4, ok, f"method agreement: worst relative gap {max(diffs):.2e} on suite 1, "
           f"{fix:.2e} on the fixture (t* {a.t_star:.4f} vs {b.t_star:.4f})")
    assert max(diffs) <= 1e-5 and fix <= 1e-5


@pytest.fixture(scope="module")
def capacity_runs(fixture_scenario, emitted):
    runs = []
    for label, p, s in expand(fixture_scenario, SweepSpec("capacity", (500.0, 1000.0, 1500.0, 2000.0))):
        shared = emitted.add(s, solve_shared(s))
        dist = emitted.add(s, solve_distributed(s))
        runs.append((p, shared, dist))
    return runs


def test_5_capacity_monotonicity(capacity_runs, verdicts):
    ts = [r[1].t_star for r in capacity_runs]
    mono = all(b >= a - 1e-6 for a, b in zip(ts, ts[1:]))
    gains = {p: (sh.profit_report.gain_percent, di.profit_report.gain_percent)
             for p, sh, di in capacity_runs}
    beats = all(gains[p][0] > gains[p][1] for p in (1000.0, 1500.0))
    desc = ", ".join(f"{p / 1000:g} MW {g[0]:.1f}%/{g[1]:.1f}%" for p, g in gains.items())
    record(verdicts, 5, mono and beats, f"capacity monotonicity: t* nondecreasing={mono}, "
           f"shared/distributed gain {desc}")
    assert mono and beats


@pytest.fixture(scope="module")
def beta_runs(fixture_scenario, emitted):
    pts = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    return [(p, s, emitted.add(s, solve_shared(s)))
            for _, p, s in expand(fixture_scenario, SweepSpec("beta", pts))]


def test_6_beta_sweep(beta_runs, verdicts):
    alloc = np.array([s.coefficients.beta * res.t_star for _, s, res in beta_runs])
    actual = np.array([res.profits for _, _, res in beta_runs])
    up = bool(np.all(np.diff(alloc[:, 1]) >= -1e-6))
    down = bool(np.all(np.diff(alloc[:, 2]) <= 1e-6))
    assert all(abs(s.coefficients.beta[0] - 0.3) < 1e-12 for _, s, _ in beta_runs)
    record(verdicts, 6, up and down,
           f"profit-coefficient sweep: user 2 allocated profit nondecreasing={up} "
           f"({alloc[0, 1]:.0f} to {alloc[-1, 1]:.0f}), user 3 nonincreasing={down} "
           f"({alloc[0, 2]:.0f} to {alloc[-1, 2]:.0f}); recomputed profits "
           f"user 2 {actual[0, 1]:.0f} to {actual[-1, 1]:.0f}")
    assert up and down


def test_7_feasibility_audit(suite1, suite2, capacity_runs, beta_runs, emitted, verdicts):
    failures = []
    for s, res in emitted.schedules:
        if res.mode.value == "distributed":
            rep = check_feasible(s.distributed_ess, res.schedule, "distributed", tol=AUDIT_TOL)
        else:
            rep = check_feasible(s.shared_ess, res.schedule, "shared", tol=AUDIT_TOL)
        if not rep.feasible:
            failures.append(rep.violations[:2])
    n = len(emitted.schedules)
    record(verdicts, 7, not failures and n > 0,
           f"feasibility audit: {n} emitted schedules re-simulated, {len(failures)} out of bounds")
    assert not failures, failures[:3]


def test_8_solver_certificates(suite1, suite2, capacity_runs, beta_runs, emitted, verdicts):
    bad, worst_res, worst_gap = [], 0.0, 0.0
    for lp, sol in emitted.programs:
        assert sol.status is Status.OPTIMAL
        res = lp.residual(sol.primal) / (1 + lp.rhs_norm())
        obj = float(lp.objective @ sol.primal)
        gap = abs(sol.dual_bound - obj) / (1 + abs(obj))
        worst_res, worst_gap = max(worst_res, res), max(worst_gap, gap)
        if res > 1e-8 or gap > 1e-8 or abs(obj - sol.objective_value) > 1e-9 * (1 + abs(obj)):
            bad.append((res, gap))
    n = len(emitted.programs)
    record(verdicts, 8, not bad and n > 0,
           f"solver certificates: {n} optimal solutions, worst scaled residual {worst_res:.1e}, "
           f"worst relative dual gap {worst_gap:.1e}")
    assert not bad, bad[:5]


def test_9_scale(fixture_scenario, verdicts):
    assert assemble_shared_program(fixture_scenario).num_vars == 2017
    t0 = time.perf_counter()
    solve_shared(fixture_scenario, "direct")
    t1 = time.perf_counter()
    solve_shared(fixture_scenario, "bisection")
    t2 = time.perf_counter()
    solve_distributed(fixture_scenario)
    t3 = time.perf_counter()
    total = t3 - t0
    record(verdicts, 9, total < 30, f"scale: M=3, N=168, 2017 variables; direct {t1 - t0:.1f} s, "
           f"bisection {t2 - t1:.1f} s, distributed {t3 - t2:.1f} s, total {total:.1f} s")
    assert total < 30
