"""Delta-shock solutions of pressureless droplet and drift-flux models.

Two independent solvers live here: front tracking with exact delta-shock
bookkeeping (:mod:`sdwave.fronts`) and a variational formula for the
identity flux with algebraic drag (:mod:`sdwave.gvp`).
"""

from .errors import SdwError, SolverError, ValidationError
from .model import CoefficientSpec, FluxSpec, State, builtin_flux
from .riemann import RiemannInput, solve_delta_riemann, solve_riemann
from .twophase import State3, solve_delta_riemann3, solve_riemann3

__version__ = "0.1.0"

__all__ = [
    "SdwError", "SolverError", "ValidationError",
    "CoefficientSpec", "FluxSpec", "State", "builtin_flux",
    "RiemannInput", "solve_riemann", "solve_delta_riemann",
    "State3", "solve_riemann3", "solve_delta_riemann3",
]
