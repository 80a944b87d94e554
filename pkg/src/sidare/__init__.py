"""Optimal and near-optimal intervention strategies for the controlled SIDARE model."""

from .backend import BACKEND
from .discretize import (
    DiscreteStrategy,
    DiscretizeConfig,
    DiscretizeResult,
    PolicyCatalog,
    discretize,
    enumerate_single_policy,
    make_objective_evaluator,
    optimize_levels,
    project_to_levels,
    prune_switches,
    refine_switch_times,
)
from .model import (
    EpidemicState,
    EquilibriumClassification,
    INITIAL_STATE,
    ModelParams,
    Stability,
    basic_reproduction_number,
    beta_from_r0,
    capacity_mortality,
    classify_equilibrium,
    vector_field,
)
from .objective import CostBreakdown, CostWeights, normalize_cost, total_objective
from .pmp import PmpSolution, SweepConfig, clamp_control, pmp_residual, solve
from .simulate import (
    Costate,
    IntegrationDivergedError,
    Strategy,
    TimeGrid,
    Trajectory,
    integrate_costate_backward,
    integrate_forward,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CostBreakdown",
    "CostWeights",
    "Costate",
    "DiscreteStrategy",
    "DiscretizeConfig",
    "DiscretizeResult",
    "EpidemicState",
    "EquilibriumClassification",
    "INITIAL_STATE",
    "IntegrationDivergedError",
    "ModelParams",
    "PmpSolution",
    "PolicyCatalog",
    "Stability",
    "Strategy",
    "SweepConfig",
    "TimeGrid",
    "Trajectory",
    "__version__",
    "basic_reproduction_number",
    "beta_from_r0",
    "capacity_mortality",
    "clamp_control",
    "classify_equilibrium",
    "discretize",
    "enumerate_single_policy",
    "integrate_costate_backward",
    "integrate_forward",
    "make_objective_evaluator",
    "normalize_cost",
    "optimize_levels",
    "pmp_residual",
    "project_to_levels",
    "prune_switches",
    "refine_switch_times",
    "solve",
    "total_objective",
    "vector_field",
]
