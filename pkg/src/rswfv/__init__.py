"""Semi-implicit, energy-stable and well-balanced finite volumes for the
rotating shallow water equations."""

from .cases import build, case_names, get_case
from .grid import BC, Grid
from .runner import RunResult, simulate
from .scheme import StepReport, compute_dt, step
from .state import Bathymetry, Params, State

__version__ = "0.1.0"

__all__ = [
    "BC",
    "Bathymetry",
    "Grid",
    "Params",
    "RunResult",
    "State",
    "StepReport",
    "build",
    "case_names",
    "compute_dt",
    "get_case",
    "simulate",
    "step",
]
