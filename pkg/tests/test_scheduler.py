from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import (LatticeInstance, highs_optimum, lattice_bound, lattice_optimum,
                     random_dominance_scenario)

from shared_ess.data_io import load_config
from shared_ess.fixture import fixture_config
from shared_ess.scenario import (CostFunction, EssSpec, ProfitCoefficients, Scenario, TimeGrid,
                                 UserProfile, uniform_costs)
from shared_ess.scheduler import (Mode, ProgramLayout, ScenarioError, assemble_shared_program,
                                  assemble_unconstrained_program, check_compare_preconditions,
                                  compare, solve_distributed, solve_shared,
                                  solve_shared_unconstrained)
from shared_ess.storage import check_feasible

# golden values for the bundled fixture, cross-checked against the bisection
# path and an independent HiGHS solve before being frozen
FIXTURE_T_STAR = 163654.0844418
FIXTURE_DISTRIBUTED = 93199.0216338
SOLAR_T_STAR = 201568.065633


def scenario(deltas, s_max=20.0, rate=20.0, lossy=False, beta=None, dist=None, price=1.0, **kw):
    deltas = np.atleast_2d(np.array(deltas, dtype=float))
    M, N = deltas.shape
    users = [UserProfile(m + 1, np.maximum(d, 0), np.maximum(-d, 0)) for m, d in enumerate(deltas)]
    ec, ed = (0.7, 0.8) if lossy else (1.0, 1.0)
    spec = EssSpec(0.0, s_max, rate, rate, ec, ed)
    if dist is not None:
        dist = [EssSpec(0.0, c, r, r, ec, ed) for c, r in dist]
    beta = beta if beta is not None else [1.0 / M] * M
    return Scenario(TimeGrid(N), users, spec, uniform_costs(price, M, N), ProfitCoefficients(beta),
                    distributed_ess=dist, allow_lossless=True, **kw)


ORACLE = dict(deltas=[[10, 0], [0, -10]], beta=[0.0, 1.0])


def test_program_dimensions():
    s = load_config(fixture_config())
    lp = assemble_shared_program(s)
    assert lp.num_vars == 1 + 3 * 168 * 4 == 2017
    assert ProgramLayout(3, 168, True).num_vars == 2017
    assert lp.var_names[0] == "t"


def test_single_surplus_slot_gives_nothing():
    assert solve_shared(scenario([[5.0]], beta=[1.0])).t_star == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("lossy,expected", [(False, 10.0), (True, 5.6)])
@pytest.mark.parametrize("method", ["direct", "bisection"])
def test_oracle_instance(lossy, expected, method):
    s = scenario(**ORACLE, lossy=lossy)
    res = solve_shared(s, method)
    assert res.t_star == pytest.approx(expected, abs=1e-5 * (1 + expected))
    assert res.profits[1] >= expected - 1e-5
    assert highs_optimum(assemble_shared_program(s))[1] == pytest.approx(expected, abs=1e-9)
    unc = solve_shared_unconstrained(s)
    assert unc.total_profit == pytest.approx(expected, abs=1e-9)
    assert unc.mode is Mode.SHARED_UNCONSTRAINED


@pytest.mark.parametrize("lossy", [False, True])
def test_oracle_instance_against_lattice(lossy):
    # the same instance shrunk tenfold; the program is positively homogeneous in
    # (net energy, capacity, rates) so the optimum shrinks tenfold as well
    inst = LatticeInstance(((10, 0), (0, -10)), ((1, 1), (1, 1)), 20, 20, lossy, (0.0, 1.0))
    t_lat, tot_lat = lattice_optimum(inst)
    s = inst.scenario()
    t_lp = solve_shared(s).t_star
    assert t_lp == pytest.approx(0.56 if lossy else 1.0, abs=1e-9)
    assert t_lat <= t_lp + 1e-9 <= t_lat + lattice_bound(inst, True)
    assert tot_lat <= solve_shared_unconstrained(s).total_profit + 1e-9


def test_all_deficit_with_flat_prices_earns_nothing():
    s = scenario([[-3, -1, -2], [-1, -4, -2]], s_max=5, rate=2, lossy=True)
    assert solve_shared_unconstrained(s).total_profit == pytest.approx(0.0, abs=1e-9)
    inst = LatticeInstance(((-3, -1, -2), (-1, -4, -2)), ((1,) * 3,) * 2, 2, 5, True, (0.5, 0.5))
    assert lattice_optimum(inst)[1] == 0.0


def test_distributed_cannot_move_energy_between_users():
    s = scenario(**ORACLE, dist=[(10, 10), (10, 10)])
    res = solve_distributed(s)
    assert res.total_profit == pytest.approx(0.0, abs=1e-9)
    assert res.mode is Mode.DISTRIBUTED
    assert len(res.trajectory) == 2


def test_distributed_single_user():
    s = scenario([[10, -10]], beta=[1.0], dist=[(10, 20)])
    assert solve_distributed(s).total_profit == pytest.approx(10.0)
    lossy = scenario([[10, -10]], beta=[1.0], lossy=True, dist=[(10, 20)])
    assert solve_distributed(lossy).total_profit == pytest.approx(5.6)


def test_distributed_without_rates():
    s = scenario([[10, -10], [-5, 5]], dist=[(10, 0), (10, 0)])
    assert solve_distributed(s).total_profit == 0.0


def test_distributed_needs_units():
    with pytest.raises(ScenarioError):
        solve_distributed(scenario(**ORACLE))


def test_distributed_executor_gives_same_answer():
    s = scenario([[4, -3, 2, -5], [-1, 3, -4, 2]], s_max=6, rate=3, lossy=True,
                 dist=[(3, 1.5), (3, 1.5)])
    with ThreadPoolExecutor(2) as pool:
        a = solve_distributed(s, executor=pool)
    b = solve_distributed(s)
    assert np.array_equal(a.schedule.charge, b.schedule.charge)


def test_single_user_compare_coincides():
    s = scenario([[6, -2, 3, -7]], beta=[1.0], lossy=True, s_max=8, rate=4, dist=[(8, 4)])
    rep = compare(s)
    assert rep.unconstrained.total_profit == pytest.approx(rep.distributed.total_profit, abs=1e-6)
    assert rep.shared.total_profit == pytest.approx(rep.distributed.total_profit, abs=1e-6)


def test_compare_refuses_inconsistent_split():
    s = scenario(**ORACLE, dist=[(10, 10), (5, 10)])
    assert check_compare_preconditions(s)
    with pytest.raises(ScenarioError):
        compare(s)


@pytest.mark.parametrize("beta", [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
def test_extreme_coefficients(beta):
    s = scenario([[5, -2, 0], [-1, 4, -6]], s_max=6, rate=3, lossy=True, beta=beta)
    res = solve_shared(s)
    assert np.all(res.profits >= np.array(beta) * res.t_star - 1e-6)
    assert np.all(res.profits >= -1e-6)
    assert 0 <= res.t_star <= solve_shared_unconstrained(s).total_profit + 1e-6


def test_terminal_state_option():
    base = scenario([[-10.0, 0.0]], beta=[1.0])
    base = base.replace(shared_ess=EssSpec(0.0, 20.0, 20.0, 20.0, 1.0, 1.0, s_init=5.0))
    free = solve_shared(base)
    assert free.t_star == pytest.approx(5.0)
    pinned = solve_shared(base.replace(terminal_state_equal=True))
    assert pinned.t_star == pytest.approx(0.0, abs=1e-9)
    assert pinned.trajectory.states[-1] == pytest.approx(5.0, abs=1e-7)


def test_grid_draw_is_recomputed_from_schedule():
    s = scenario([[10, -10], [-3, -4]], lossy=True)
    res = solve_shared(s)
    expected = np.maximum(0, res.schedule.charge - res.schedule.discharge - s.net_matrix())
    assert np.array_equal(res.grid_draw.draw, expected)


def test_simultaneous_flags_are_reported_not_removed():
    s = scenario([[30, -5]], beta=[1.0], s_max=1.0, rate=30.0, lossy=True)
    res = solve_shared(s)
    both = (res.schedule.charge > 1e-6) & (res.schedule.discharge > 1e-6)
    assert sorted(res.simultaneous_flags) == sorted((m + 1, n + 1) for m, n in zip(*np.nonzero(both)))


def test_piecewise_tariff_against_highs():
    costs = [[CostFunction(((1.0, 0.0), (3.0, -4.0)))] * 4] * 2
    s = scenario([[6, -5, 3, -8], [-2, 1, -6, 4]], s_max=7, rate=4, lossy=True).replace(costs=costs)
    unc = solve_shared_unconstrained(s)
    status, val = highs_optimum(assemble_unconstrained_program(s))
    assert unc.total_profit == pytest.approx(unc.profit_report.total_baseline + val, abs=1e-7)
    res = solve_shared(s)
    assert res.t_star == pytest.approx(highs_optimum(assemble_shared_program(s))[1], abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1.05, 3.0))
def test_capacity_never_hurts(seed, factor):
    s = random_dominance_scenario(np.random.default_rng(seed))
    big = s.with_capacity_scale(factor)
    assert solve_shared(big).t_star >= solve_shared(s).t_star - 1e-6
    assert (solve_shared_unconstrained(big).total_profit
            >= solve_shared_unconstrained(s).total_profit - 1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_methods_agree(seed):
    s = random_dominance_scenario(np.random.default_rng(seed))
    a = solve_shared(s).t_star
    b = solve_shared(s, "bisection").t_star
    assert abs(a - b) <= 1e-5 * (1 + a)


def test_fixture_golden():
    s = load_config(fixture_config())
    res = solve_shared(s)
    assert res.t_star == pytest.approx(FIXTURE_T_STAR, rel=1e-6)
    assert check_feasible(s.shared_ess, res.schedule).feasible
    dist = solve_distributed(s)
    assert dist.total_profit == pytest.approx(FIXTURE_DISTRIBUTED, rel=1e-6)


def test_solar_only_fixture_golden():
    res = solve_shared(load_config(fixture_config("solar")))
    assert res.t_star == pytest.approx(SOLAR_T_STAR, rel=1e-6)
