"""Radial solver and verification harness for relaxed compressible flow
outside the unit ball: Maxwell-type stress relaxation, symmetric-hyperbolic
structure checks, energy diagnostics, and relaxation-limit studies."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, NumericalAbort, StructureError
from .model import (
    FluidParams,
    InitConfig,
    RadialGrid,
    State,
    equilibrium_stress,
    make_initial_data,
    pressure,
    pressure_prime,
    taylor_potential,
)
from .solver import SolverConfig, Trajectory, run, run_classical

__all__ = [
    "ConfigError",
    "DomainError",
    "NumericalAbort",
    "StructureError",
    "FluidParams",
    "InitConfig",
    "RadialGrid",
    "State",
    "SolverConfig",
    "Trajectory",
    "equilibrium_stress",
    "make_initial_data",
    "pressure",
    "pressure_prime",
    "taylor_potential",
    "run",
    "run_classical",
    "__version__",
]
