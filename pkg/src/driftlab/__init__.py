"""Numerical laboratory for the 1D Lagrangian drift-flux model with a vacuum boundary."""

from .grid import MassGrid
from .integrator import SchemeConfig, StepResult, run_to_time, step
from .model import (InitialDataSpec, ModelParams, PhysicalState, TransformedState, build_initial_data,
                    build_stationary, validate_params)

__all__ = [
    "InitialDataSpec", "MassGrid", "ModelParams", "PhysicalState", "SchemeConfig", "StepResult",
    "TransformedState", "build_initial_data", "build_stationary", "run_to_time", "step", "validate_params",
]
