"""The weighted Riesz potential ``J(x) = int |x - y|^(-gamma) (1 + |y|^beta)^(-1) dy``
and the supremum norm of the resolvent.

``J`` is radial.  Writing ``|y| = rho`` and averaging the kernel over the
sphere gives

    A(s, rho) = N omega_N max(s, rho)^(-gamma)
                * 2F1(gamma/2, gamma/2 - N/2 + 1; N/2; (min/max)^2),

so ``J(s) = int_0^inf A(s, rho) rho^(N-1) / (1 + rho^beta) d rho``.  In the
scaled variable ``xi = rho / s`` the integral is split at ``xi = 1/2`` into a
near part and a far part (the region ``xi > 1`` through ``t = 1/xi``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from .core import OperatorParams, ParameterError, sphere_area

__all__ = [
    "KernelAsymptoticsCase",
    "RegimeFitError",
    "weighted_riesz_potential",
    "weighted_riesz_potential_at_origin",
    "predicted_exponent",
    "fit_asymptotic_regime",
    "resolvent_sup_norm",
    "resolvent_sup_norm_by_quadrature",
    "DEFAULT_FIT_RADII",
]

DEFAULT_FIT_RADII = tuple(np.geomspace(10.0, 1e3, 20))

_QUAD = dict(epsabs=0.0, epsrel=1e-12, limit=400)


class RegimeFitError(ArithmeticError):
    """Neither candidate model describes the sampled values."""


def _validate(gamma: float, beta: float, N: int):
    if int(N) != N or N < 1:
        raise ParameterError(f"dimension must be a positive integer, got {N}")
    if not 0 < gamma < N:
        raise ParameterError(f"need 0 < gamma < N, got gamma={gamma}")
    if not gamma + beta > N:
        raise ParameterError(f"need gamma + beta > N, got {gamma} + {beta}")


class _SphericalMean:
    """Spherical mean ``F(x^2)`` of ``|e - x w|^(-gamma)`` for ``0 <= x < 1``.

    With ``m = N - 1 - gamma`` the mean behaves like ``(1 - x)^m`` near
    ``x = 1`` when ``m < 0`` and like ``-log(1 - x)`` when ``m = 0``.
    ``regular(x)`` returns ``F(x^2) / (1 - x)^min(m, 0)``, which stays bounded,
    and ``edge_exponent`` is the algebraic weight to put back at ``x = 1``.
    """

    def __init__(self, gamma: float, N: int):
        self.a = gamma / 2.0
        self.b = gamma / 2.0 - N / 2.0 + 1.0
        self.c = N / 2.0
        self.m = N - 1.0 - gamma
        self.edge_exponent = min(self.m, 0.0)

    def __call__(self, x):
        return special.hyp2f1(self.a, self.b, self.c, x * x)

    def regular(self, x):
        a, b, c, m = self.a, self.b, self.c, self.m
        if m < 0:
            # Euler: F = (1 - z)^m 2F1(c-a, c-b; c; z), and 1 - z = (1 - x)(1 + x)
            return (1.0 + x) ** m * special.hyp2f1(c - a, c - b, c, x * x)
        if m == 0 and x > 0.7:
            return self._log_series((1.0 - x) * (1.0 + x))
        return special.hyp2f1(a, b, c, x * x)

    def _log_series(self, w):
        # a + b = c: expansion of 2F1 about z = 1 in powers of w = 1 - z
        a, b = self.a, self.b
        total, term = 0.0, 1.0
        lw = math.log(w)
        for n in range(200):
            piece = term * (2.0 * special.digamma(n + 1.0) - special.digamma(a + n)
                            - special.digamma(b + n) - lw)
            total += piece
            if n > 5 and abs(piece) < 1e-17 * abs(total):
                break
            term *= (a + n) * (b + n) / (n + 1.0) ** 2 * w
        return math.gamma(a + b) / (math.gamma(a) * math.gamma(b)) * total


def weighted_riesz_potential_at_origin(gamma: float, beta: float, N: int) -> float:
    """``J(0) = N omega_N int_0^inf rho^(N-1-gamma) / (1 + rho^beta) d rho`` by quadrature."""
    _validate(gamma, beta, N)
    head, _ = integrate.quad(lambda r: 1.0 / (1.0 + r ** beta), 0.0, 1.0,
                             weight="alg", wvar=(N - 1.0 - gamma, 0.0), **_QUAD)
    # rho = 1/t on (1, inf)
    tail, _ = integrate.quad(lambda t: 1.0 / (t ** beta + 1.0), 0.0, 1.0,
                             weight="alg", wvar=(gamma + beta - N - 1.0, 0.0), **_QUAD)
    return sphere_area(N) * (head + tail)


def weighted_riesz_potential(x_norm: float, gamma: float, beta: float, N: int) -> float:
    """``J`` at ``|x| = x_norm`` from the near part ``xi < 1/2`` and the far part.

    ``xi = rho / s``.  Each part is split again where the weight turns over
    (``rho = 1``) and at the kernel singularity ``xi = 1``.
    """
    _validate(gamma, beta, N)
    s = float(x_norm)
    if s < 0:
        raise ParameterError("x_norm must be nonnegative")
    if s == 0.0:
        return weighted_riesz_potential_at_origin(gamma, beta, N)
    sb = s ** beta
    F = _SphericalMean(gamma, N)
    m = F.edge_exponent

    # J_1: xi in (0, 1/2), where max = s and min/max = xi
    near = _pieces(lambda xi: xi ** (N - 1) * F(xi) / (1.0 + sb * xi ** beta),
                   0.0, 0.5, [1.0 / s])
    # J_2 inside the ball |y| < s: xi in (1/2, 1)
    mid = _pieces_to_edge(lambda xi: xi ** (N - 1) * F.regular(xi) / (1.0 + sb * xi ** beta),
                          0.5, m, [1.0 / s])
    # J_2 outside: t = 1/xi in (0, 1); the integrand becomes
    # t^(gamma+beta-N-1) F(t^2) / (t^beta + s^beta)
    q = gamma + beta - N - 1.0
    far_lo = _pieces_alg(lambda t: F(t) / (t ** beta + sb), q, 0.5, [s])
    far_hi = _pieces_to_edge(lambda t: t ** q * F.regular(t) / (t ** beta + sb), 0.5, m, [s])
    return sphere_area(N) * s ** (N - gamma) * (near + mid + far_lo + far_hi)


def _pieces(fun, a, b, points):
    edges = [a] + [p for p in sorted(points) if a < p < b] + [b]
    return sum(integrate.quad(fun, lo, hi, **_QUAD)[0] for lo, hi in zip(edges[:-1], edges[1:]))


def _pieces_alg(fun, power, b, points):
    """``int_0^b t^power fun(t) dt`` with the algebraic weight on the first piece."""
    edges = [0.0] + [p for p in sorted(points) if 0.0 < p < b] + [b]
    total = integrate.quad(fun, 0.0, edges[1], weight="alg", wvar=(power, 0.0), **_QUAD)[0]
    for lo, hi in zip(edges[1:-1], edges[2:]):
        total += integrate.quad(lambda t: t ** power * fun(t), lo, hi, **_QUAD)[0]
    return total


def _pieces_to_edge(fun, a, power, points):
    """``int_a^1 (1 - x)^power fun(x) dx`` with the algebraic weight on the last piece."""
    edges = [a] + [p for p in sorted(points) if a < p < 1.0] + [1.0]
    total = integrate.quad(fun, edges[-2], 1.0, weight="alg", wvar=(0.0, power), **_QUAD)[0]
    for lo, hi in zip(edges[:-2], edges[1:-1]):
        total += integrate.quad(lambda x: (1.0 - x) ** power * fun(x), lo, hi, **_QUAD)[0]
    return total


def predicted_exponent(gamma: float, beta: float, N: int) -> float:
    """Decay exponent of ``J``: ``N - gamma - beta`` for ``beta < N``, else ``-gamma``."""
    return N - gamma - beta if beta < N else -gamma


def regime_of(beta: float, N: int) -> str:
    if beta < N:
        return "power"
    if beta == N:
        return "log"
    return "pure"


@dataclass
class KernelAsymptoticsCase:
    gamma: float
    beta: float
    N: int
    regime: str
    fitted_exponent: float
    fitted_log_flag: bool
    predicted_exponent: float
    rss_power: float
    rss_log: float
    prefactor: float

    @property
    def exponent_error(self) -> float:
        return abs(self.fitted_exponent - self.predicted_exponent)


def _linear_fit(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return coef, float(resid @ resid)


def fit_asymptotic_regime(gamma: float, beta: float, N: int,
                          sample_radii: Optional[Sequence[float]] = None,
                          max_rms: float = 0.05) -> KernelAsymptoticsCase:
    """Fit ``J ~ c |x|^k`` and ``J ~ c |x|^k log|x|`` and keep the better one.

    Both models have two parameters, so comparing AIC reduces to comparing
    residual sums of squares.  Raises ``RegimeFitError`` if even the better
    model leaves an RMS residual (in log J) above ``max_rms``.
    """
    _validate(gamma, beta, N)
    radii = np.asarray(DEFAULT_FIT_RADII if sample_radii is None else sample_radii, dtype=float)
    if radii.min() < 10 or radii.max() / radii.min() < 100:
        raise ParameterError("sample radii must start at >= 10 and span at least two decades")
    vals = np.array([weighted_riesz_potential(s, gamma, beta, N) for s in radii])
    x = np.log(radii)
    y = np.log(vals)
    (c0, k0), rss0 = _linear_fit(x, y)
    (c1, k1), rss1 = _linear_fit(x, y - np.log(x))
    use_log = rss1 < rss0
    rss = min(rss0, rss1)
    if math.sqrt(rss / radii.size) > max_rms:
        raise RegimeFitError(f"RMS residual {math.sqrt(rss / radii.size):.3g} exceeds {max_rms}")
    return KernelAsymptoticsCase(
        gamma=gamma, beta=beta, N=int(N), regime=regime_of(beta, N),
        fitted_exponent=float(k1 if use_log else k0), fitted_log_flag=bool(use_log),
        predicted_exponent=predicted_exponent(gamma, beta, N),
        rss_power=rss0, rss_log=rss1, prefactor=float(math.exp(c1 if use_log else c0)))


def resolvent_sup_norm(params: OperatorParams) -> float:
    """``||T||_inf = pi / ((N - 2) alpha sin(2 pi / alpha))``."""
    N, a = params.N, params.alpha
    return math.pi / ((N - 2) * a * math.sin(2.0 * math.pi / a))


def resolvent_sup_norm_by_quadrature(params: OperatorParams) -> float:
    """``J(0) / (N (N-2) omega_N)`` with ``gamma = N - 2`` and ``beta = alpha``.

    ``T 1`` is maximal at the origin, where it equals this value.
    """
    N = params.N
    return weighted_riesz_potential_at_origin(N - 2.0, params.alpha, N) / (sphere_area(N) * (N - 2))
