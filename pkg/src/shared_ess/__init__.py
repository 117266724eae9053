"""Day-ahead scheduling of one storage unit shared by several users with renewable generation."""

from .costs import baseline_cost, eval_cost, profit_report, recover_grid_draw, user_profit
from .lp_solver import (LinearProgram, LpSolution, Status, bisect_max, check_feasibility,
                        solve_lp)
from .scenario import (CostFunction, EssSpec, NetEnergyProfile, ProfitCoefficients, Scenario,
                       TimeGrid, UserProfile, build_net_profile, split_consistency,
                       validate_scenario)
from .scheduler import (ScheduleResult, assemble_shared_program, compare, solve_distributed,
                        solve_shared, solve_shared_unconstrained)
from .storage import (Schedule, StateTrajectory, check_feasible, simulate_distributed_state,
                      simulate_shared_state)

__version__ = "0.1.0"

__all__ = [
    "baseline_cost", "eval_cost", "profit_report", "recover_grid_draw", "user_profit",
    "LinearProgram", "LpSolution", "Status", "bisect_max", "check_feasibility", "solve_lp",
    "CostFunction", "EssSpec", "NetEnergyProfile", "ProfitCoefficients", "Scenario", "TimeGrid",
    "UserProfile", "build_net_profile", "split_consistency", "validate_scenario",
    "ScheduleResult", "assemble_shared_program", "compare", "solve_distributed", "solve_shared",
    "solve_shared_unconstrained",
    "Schedule", "StateTrajectory", "check_feasible", "simulate_distributed_state",
    "simulate_shared_state",
]
