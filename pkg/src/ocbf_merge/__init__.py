"""Event-triggered control barrier function merging control for automated vehicles."""
from .model import CavAgent, CavState, ConstraintParams, Geometry
from .planner import UnconstrainedPlan, beta_from_alpha, eval_ref, solve_unconstrained
from .qp import QpSolution, solve, solve_relaxed
from .simulation import (EVENT_TRIGGERED, TIME_DRIVEN, RunResult, SimConfig, run,
                         run_event_driven, run_time_driven)

__all__ = [
    "CavAgent", "CavState", "ConstraintParams", "Geometry", "UnconstrainedPlan",
    "beta_from_alpha", "eval_ref", "solve_unconstrained", "QpSolution", "solve",
    "solve_relaxed", "SimConfig", "RunResult", "run", "run_time_driven",
    "run_event_driven", "TIME_DRIVEN", "EVENT_TRIGGERED",
]
