"""Quadratic-form quantities: the dissipativity sector and a radial Hardy inequality.

For ``u`` in the domain, ``-Re <L u, u*> >= a B^2 + C^2`` and
``|Im <L u, u*>| <= b B C`` with

    a = p - 1 - p alpha / (alpha - 2 + N),   b = |p - 2| + p alpha / (alpha - 2 + N).

The best ``l`` with ``a B^2 + C^2 >= l b B C`` for all ``B, C > 0`` is
``2 sqrt(a) / b`` (attained at ``C = sqrt(a) B``), and ``L`` is sectorial with
half-angle ``theta = arctan(l)`` beyond the right angle.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BoundReport, OperatorParams, ParameterError, RadialFunction, radial_quadrature

__all__ = [
    "NonAnalyticRegimeError",
    "DegenerateIntegrandWarning",
    "SectorAngle",
    "sector_coefficients",
    "sector_angle",
    "sector_constant_by_grid",
    "hardy_check",
    "hardy_first_power_check",
    "random_hardy_profile",
]


class NonAnalyticRegimeError(ParameterError):
    """``a <= 0``: the form estimate gives contraction at best, no sector."""


class DegenerateIntegrandWarning(RuntimeWarning):
    """``|u|^(p-2)`` is singular at interior zeros of ``u`` when ``p < 2``."""


@dataclass(frozen=True)
class SectorAngle:
    params: OperatorParams
    a_coeff: float
    b_coeff: float
    tangent: float
    angle: float

    @property
    def degrees(self) -> float:
        return math.degrees(self.angle)


def sector_coefficients(params: OperatorParams):
    """``(a, b)`` of the real-part and imaginary-part estimates."""
    if math.isinf(params.p):
        raise ParameterError("the sector estimate needs finite p")
    p, N, alpha = params.p, params.N, params.alpha
    drift = p * alpha / (alpha - 2.0 + N)
    return p - 1.0 - drift, abs(p - 2.0) + drift


def sector_angle(params: OperatorParams) -> SectorAngle:
    """Optimal ``l = 2 sqrt(a) / b`` and ``theta = arctan(l)``.

    Requires ``alpha < (N - 2)(p - 1)``, equivalently ``a > 0``.
    """
    a, b = sector_coefficients(params)
    if not a > 0:
        raise NonAnalyticRegimeError(
            f"a = {a:.6g} <= 0: alpha = {params.alpha:g} is not below (N-2)(p-1) = "
            f"{(params.N - 2) * (params.p - 1):g}")
    l = 2.0 * math.sqrt(a) / b
    return SectorAngle(params, a, b, l, math.atan(l))


def sector_constant_by_grid(a: float, b: float, n: int = 2000, extent: float = 10.0) -> float:
    """``min (a B^2 + C^2) / (b B C)`` over an ``n x n`` grid in ``(0, extent]^2``."""
    x = np.linspace(extent / n, extent, n)
    B, C = np.meshgrid(x, x, indexing="ij")
    return float(np.min((a * B * B + C * C) / (b * B * C)))


def _derivative(u: RadialFunction) -> np.ndarray:
    if u.derivative is not None:
        return u.derivative
    return np.gradient(u.values, u.nodes, edge_order=2)


def _abs_power(values, k, zero_value=0.0):
    a = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0, a ** k, zero_value if k < 0 else (1.0 if k == 0 else 0.0))
    return out


def _check_args(u: RadialFunction, p: float, gamma: float, N: int):
    if not p > 1:
        raise ParameterError("p must exceed 1")
    if gamma < 0:
        raise ParameterError("gamma must be nonnegative")
    if u.values[-1] != 0.0 and abs(u.values[-1]) > 1e-12 * np.max(np.abs(u.values)):
        raise ParameterError("u must vanish at the end of its grid (compact support)")
    if p < 2:
        interior = u.values[1:-1]
        if np.any(interior == 0) or np.any(np.sign(interior[1:]) != np.sign(interior[:-1])):
            warnings.warn("p < 2 and u has interior zeros; |u|^(p-2) is set to 0 there",
                          DegenerateIntegrandWarning, stacklevel=3)


def _integral(values, u: RadialFunction, N: int, weight_exponent: float) -> float:
    return radial_quadrature(RadialFunction(u.grid, values), N, weight_exponent)


def hardy_check(u: RadialFunction, p: float, gamma: float, N: int, rtol: float = 1e-8) -> BoundReport:
    """``int |u|^p |x|^gamma <= (p/(gamma+N))^2 int |u|^(p-2) u'^2 |x|^(gamma+2)``.

    Real radial ``u`` with compact support inside its grid.  Both sides by
    the same radial quadrature; the common factor ``N omega_N`` cancels.
    """
    _check_args(u, p, gamma, N)
    du = _derivative(u)
    lhs = _integral(_abs_power(u.values, p), u, N, gamma)
    rhs = _integral(_abs_power(u.values, p - 2.0) * du * du, u, N, gamma + 2.0)
    const = (p / (gamma + N)) ** 2
    return BoundReport.check(f"hardy[p={p:g},gamma={gamma:g}]", const * rhs, lhs, sense="upper",
                             rtol=rtol, details={"constant": const, "rhs_integral": rhs})


def hardy_first_power_check(u: RadialFunction, p: float, gamma: float, N: int,
                            rtol: float = 1e-8) -> BoundReport:
    """``int |u|^p |x|^gamma <= p/(gamma+N) int |u|^(p-1) |u'| |x|^(gamma+1)``."""
    _check_args(u, p, gamma, N)
    du = _derivative(u)
    lhs = _integral(_abs_power(u.values, p), u, N, gamma)
    rhs = _integral(_abs_power(u.values, p - 1.0) * np.abs(du), u, N, gamma + 1.0)
    const = p / (gamma + N)
    return BoundReport.check(f"hardy_first_power[p={p:g},gamma={gamma:g}]", const * rhs, lhs,
                             sense="upper", rtol=rtol, details={"constant": const, "rhs_integral": rhs})


def random_hardy_profile(rng: np.random.Generator, degree: Optional[int] = None):
    """Random even polynomial times a polynomial bump, as a profile object."""
    from .profiles import PolyTimesBump

    deg = int(rng.integers(0, 4)) if degree is None else degree
    coeffs = tuple(rng.normal(size=deg + 1))
    radius = float(rng.uniform(0.5, 3.0))
    power = int(rng.integers(3, 6))
    return PolyTimesBump(coeffs, radius, power)
