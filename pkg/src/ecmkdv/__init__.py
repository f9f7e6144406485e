"""Finite difference schemes for the modified KdV equation that conserve mass and energy."""

from .grid import GridFunction, TwoLevelState
from .scheme import NewtonConfig, SchemeConfig, step
from .experiment import ExperimentConfig, exact_solution, run

__all__ = [
    "ExperimentConfig",
    "GridFunction",
    "NewtonConfig",
    "SchemeConfig",
    "TwoLevelState",
    "exact_solution",
    "run",
    "step",
]
__version__ = "0.1.0"
