"""Island power system operation simulator.

Three-layer MILP generation scheduling (day-ahead, intraday, real-time) for
island grids hosting wind, PV and battery storage under central-dispatch or
hybrid-station self-dispatch management, with annual scenario sweeps, LCOE
economics and Pareto analysis.
"""

__version__ = "0.1.0"

from .domain import (AnnualLedger, BesUnit, DispatchSchedule, HpsPlant,
                     ReserveRule, Scenario, SystemSnapshot, ThermalUnit,
                     validate_schedule, validate_system)
from .milp import LinearModel, Solution, add_piecewise_cost, solve, write_lp
from .series import HourlySeries, ingest_csv, synthesize
from .uced import (UcedProblem, build_intraday_offer, build_offer,
                   primary_up_requirement, solve_uced)
from .hps import HpsOrder, HpsRealization, self_dispatch
from .rt import RtProblem, solve_rt
from .economics import (EconomicParams, EconomicReport, capacity_credit,
                        lcoe_central, lcoe_self, system_cost_impact,
                        total_cost_impact)
from .pareto import ParetoPoint, extract_pareto
from .config import (IslandSystem, SolverSettings, SweepPlan, load_config,
                     paper_grids, system_from_config)
from .orchestrator import ResultStore, run_scenario, run_sweep

__all__ = [
    "AnnualLedger", "BesUnit", "DispatchSchedule", "HpsPlant", "ReserveRule",
    "Scenario", "SystemSnapshot", "ThermalUnit", "validate_schedule",
    "validate_system", "LinearModel", "Solution", "add_piecewise_cost", "solve",
    "write_lp", "HourlySeries", "ingest_csv", "synthesize", "UcedProblem",
    "build_intraday_offer", "build_offer", "primary_up_requirement",
    "solve_uced", "HpsOrder", "HpsRealization", "self_dispatch", "RtProblem",
    "solve_rt", "EconomicParams", "EconomicReport", "capacity_credit",
    "lcoe_central", "lcoe_self", "system_cost_impact", "total_cost_impact",
    "ParetoPoint", "extract_pareto", "IslandSystem", "SolverSettings",
    "SweepPlan", "load_config", "paper_grids", "system_from_config",
    "ResultStore", "run_scenario", "run_sweep",
]
