"""forchflow: simulation and verification harness for generalized
Forchheimer flows in porous media."""

from .constitutive import (
    DegeneracyExponents,
    ForchheimerPolynomial,
    KernelEvaluation,
    RootSolveError,
    darcy,
    degree_condition,
    eval_g,
    eval_H,
    eval_K,
    flux_jacobian,
    monotonicity_gap,
    power_law,
    solve_s,
    three_term,
    two_term,
)
from .grid import BoundaryFlux, Grid, ScalarField, zero_flux
from .kernels import ACTIVE_BACKEND
from .solver import ObserverSpec, RunSpec, SolverConfig, StepFailure, make_initial, newton_step, run

__all__ = [
    "ACTIVE_BACKEND",
    "BoundaryFlux",
    "DegeneracyExponents",
    "ForchheimerPolynomial",
    "Grid",
    "KernelEvaluation",
    "ObserverSpec",
    "RootSolveError",
    "RunSpec",
    "ScalarField",
    "SolverConfig",
    "StepFailure",
    "darcy",
    "degree_condition",
    "eval_H",
    "eval_K",
    "eval_g",
    "flux_jacobian",
    "make_initial",
    "monotonicity_gap",
    "newton_step",
    "power_law",
    "run",
    "solve_s",
    "three_term",
    "two_term",
    "zero_flux",
]

__version__ = "0.1.0"
