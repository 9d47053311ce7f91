"""Feller classification of the endpoint at infinity for the radial equation.

Radial solutions of ``lambda u - (1 + rho^alpha)(u'' + (N-1)/rho u') = 0``
are governed by the scale density ``W(rho) = rho^(N-3)`` (in the normalization
used here) and the two Feller functions

    Q(rho) = (rho^(N-2) - 1) / ((N-2)(1 + rho^alpha) rho^(N-3)),
    R(rho) = rho^(N-3) int_1^rho ds / ((1 + s^alpha) s^(N-3)).

Infinity is an entrance endpoint when ``Q`` is integrable on ``(1, inf)`` and
``R`` is not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy import integrate

from .core import ParameterError

__all__ = [
    "EndpointClassification",
    "InconclusiveClassificationError",
    "feller_functions",
    "Q_partial_integral",
    "R_partial_integral",
    "integrability_rate",
    "classify_infinity",
    "DEFAULT_LIMITS",
    "RATE_MARGIN",
]

DEFAULT_LIMITS = tuple(10.0 ** k for k in range(1, 7))
# distance from the threshold a = -1 below which the fitted rate is not trusted
RATE_MARGIN = 0.05

_QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=400)


class InconclusiveClassificationError(ArithmeticError):
    """The fitted tail exponent is too close to the integrability threshold."""

    def __init__(self, message: str, rate: float):
        super().__init__(message)
        self.rate = rate


def _validate(N: int, alpha: float):
    if int(N) != N or N < 3:
        raise ParameterError(f"dimension must be an integer >= 3, got {N}")
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")


def _h(s, N, alpha):
    return 1.0 / ((1.0 + s ** alpha) * s ** (N - 3))


def _Q(rho, N, alpha):
    return (rho ** (N - 2) - 1.0) / ((N - 2) * (1.0 + rho ** alpha) * rho ** (N - 3))


def _decades(a: float, b: float):
    # piecewise quad over logarithmic pieces keeps relative accuracy on long ranges
    if b <= a:
        return []
    n = max(1, int(math.ceil(math.log10(b / a) * 2)))
    edges = np.geomspace(a, b, n + 1)
    return list(zip(edges[:-1], edges[1:]))


def feller_functions(N: int, alpha: float, rho: float) -> Tuple[float, float, float]:
    """``(W, Q, R)`` at ``rho >= 1``."""
    _validate(N, alpha)
    if rho < 1:
        raise ParameterError(f"rho must be >= 1, got {rho}")
    W = rho ** (N - 3)
    Q = _Q(rho, N, alpha)
    integral = sum(integrate.quad(_h, a, b, args=(N, alpha), **_QUAD)[0]
                   for a, b in _decades(1.0, rho))
    return float(W), float(Q), float(W * integral)


def _Q_increment(N, alpha, a, b):
    return sum(integrate.quad(_Q, lo, hi, args=(N, alpha), **_QUAD)[0] for lo, hi in _decades(a, b))


def _H(N, alpha, b):
    return sum(integrate.quad(_h, lo, hi, args=(N, alpha), **_QUAD)[0] for lo, hi in _decades(1.0, b))


def _R_increment(N, alpha, a, b, H_a):
    # int_a^b rho^(N-3) [H(a) + int_a^rho h] d rho, the inner part by Fubini
    k = N - 2

    def fun(s):
        return _h(s, N, alpha) * (b ** k - s ** k) / k

    inner = sum(integrate.quad(fun, lo, hi, **_QUAD)[0] for lo, hi in _decades(a, b))
    return H_a * (b ** k - a ** k) / k + inner


def Q_partial_integral(N: int, alpha: float, M: float) -> float:
    """``int_1^M Q(rho) d rho``."""
    _validate(N, alpha)
    return float(_Q_increment(N, alpha, 1.0, M))


def R_partial_integral(N: int, alpha: float, M: float) -> float:
    """``int_1^M R(rho) d rho``, reduced to a single integral by Fubini:

    ``int_1^M h(s) (M^(N-2) - s^(N-2)) / (N-2) ds`` with ``h = 1/((1+s^alpha) s^(N-3))``.
    """
    _validate(N, alpha)
    return float(_R_increment(N, alpha, 1.0, M, 0.0))


def integrability_rate(limits: Sequence[float], increments: Sequence[float], window: int = 3):
    """Tail exponent ``a`` of an integrand from its integrals between geometric limits.

    ``increments[k]`` is the integral over ``[limits[k], limits[k+1]]``; it
    scales like ``limits[k]^(a+1)``, so the slope of log-increments against
    ``log M`` over the last ``window`` increments is ``a + 1``.
    Returns ``(a, nondecreasing)`` where the flag records whether the
    increments in the window never shrink.
    """
    limits = np.asarray(limits, dtype=float)
    inc = np.asarray(increments, dtype=float)
    if inc.size != limits.size - 1:
        raise ParameterError("need one increment per pair of consecutive limits")
    if np.any(inc <= 0):
        raise ParameterError("increments of a positive integrand must be positive")
    x = np.log(limits[1:])[-window:]
    y = np.log(inc)[-window:]
    slope = np.polyfit(x, y, 1)[0]
    return float(slope - 1.0), bool(np.all(np.diff(inc[-window:]) >= 0))


def _integrable(name: str, limits, increments) -> Tuple[bool, float]:
    a, nondecreasing = integrability_rate(limits, increments)
    if nondecreasing:
        # increments that do not shrink cannot sum to a finite limit
        return False, a
    if abs(a + 1.0) < RATE_MARGIN:
        raise InconclusiveClassificationError(
            f"{name}: fitted tail exponent {a:.4f} is within {RATE_MARGIN} of -1", a)
    return a < -1.0, a


_TABLE = {(True, False): "entrance", (False, True): "exit",
          (True, True): "regular", (False, False): "natural"}


@dataclass
class EndpointClassification:
    N: int
    alpha: float
    Q_integrable: bool
    R_integrable: bool
    classification: str
    Q_partial_integrals: List[Tuple[float, float]] = field(default_factory=list)
    R_partial_integrals: List[Tuple[float, float]] = field(default_factory=list)
    Q_rate: float = math.nan
    R_rate: float = math.nan

    Q_increments: List[float] = field(default_factory=list)
    R_increments: List[float] = field(default_factory=list)

    def cauchy_increment(self, which: str = "Q") -> float:
        """Integral over the last interval ``[M_(n-1), M_n]`` (difference of the last two partial integrals)."""
        inc = self.Q_increments if which == "Q" else self.R_increments
        return inc[-1]

    def growth_factor(self, which: str = "R", lo: float = 1e3, hi: float = 1e6) -> float:
        seq = dict(self.Q_partial_integrals if which == "Q" else self.R_partial_integrals)
        return seq[hi] / seq[lo]


def classify_infinity(N: int, alpha: float, limits: Sequence[float] = DEFAULT_LIMITS
                      ) -> EndpointClassification:
    """Entrance / exit / regular / natural from the partial integrals of ``Q`` and ``R``.

    An integrand counts as integrable when its fitted tail exponent is below
    ``-1``; increments that stop shrinking count as non-integrable.
    """
    _validate(N, alpha)
    limits = [float(M) for M in limits]
    if limits[0] < 1 or any(b <= a for a, b in zip(limits, limits[1:])):
        raise ParameterError("limits must be >= 1 and strictly increasing")
    edges = [1.0] + limits
    q_inc = [_Q_increment(N, alpha, a, b) for a, b in zip(edges[:-1], edges[1:])]
    r_inc = [_R_increment(N, alpha, a, b, _H(N, alpha, a)) for a, b in zip(edges[:-1], edges[1:])]
    qv = np.cumsum(q_inc).tolist()
    rv = np.cumsum(r_inc).tolist()
    q_ok, q_rate = _integrable("Q", limits, q_inc[1:])
    r_ok, r_rate = _integrable("R", limits, r_inc[1:])
    return EndpointClassification(
        N=int(N), alpha=float(alpha), Q_integrable=q_ok, R_integrable=r_ok,
        classification=_TABLE[(q_ok, r_ok)],
        Q_partial_integrals=list(zip(limits, qv)), R_partial_integrals=list(zip(limits, rv)),
        Q_rate=q_rate, R_rate=r_rate, Q_increments=q_inc, R_increments=r_inc)
