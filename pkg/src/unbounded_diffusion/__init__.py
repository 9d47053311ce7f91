"""Numerical companion for ``L = (1 + |x|^alpha) Laplacian`` on ``R^N`` (``N >= 3``, ``alpha > 2``).

Radial resolvent by Green's function, closed-form bounds and their probes,
Feller classification at infinity, the spectrum of ``L`` in ``L^2`` of the
weighted measure, Dirichlet approximations of the semigroup on balls, and
the dissipativity sector.
"""
from .core import (
    BoundReport,
    DivergentIntegralError,
    OperatorParams,
    ParameterError,
    RadialFunction,
    RadialGrid,
    lp_norm,
    radial_quadrature,
    sphere_area,
    unit_ball_volume,
)
from .potential import apply_resolvent, apply_gradient_operator, resolvent_norm_bound
from .asymptotics import resolvent_sup_norm, weighted_riesz_potential
from .feller import classify_infinity
from .spectral import compute_spectrum, default_problem, eigenvalue_bounds, extrapolate_in_radius
from .semigroup import solve_on_ball
from .forms import hardy_check, sector_angle

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "DivergentIntegralError",
    "OperatorParams",
    "ParameterError",
    "RadialFunction",
    "RadialGrid",
    "lp_norm",
    "radial_quadrature",
    "sphere_area",
    "unit_ball_volume",
    "apply_resolvent",
    "apply_gradient_operator",
    "resolvent_norm_bound",
    "resolvent_sup_norm",
    "weighted_riesz_potential",
    "classify_infinity",
    "compute_spectrum",
    "default_problem",
    "eigenvalue_bounds",
    "extrapolate_in_radius",
    "solve_on_ball",
    "hardy_check",
    "sector_angle",
]
