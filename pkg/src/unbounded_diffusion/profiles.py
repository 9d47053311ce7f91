"""Analytic radial profiles with exact first/second derivatives.

Used as data for the resolvent, Hardy and semigroup checks.  Every profile
exposes ``value``, ``d1``, ``d2`` (derivatives in ``r``) and ``laplacian``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Profile",
    "Gaussian",
    "PolyBump",
    "SmoothBump",
    "Plateau",
    "PolyTimesBump",
    "smoothstep",
    "SMOOTHSTEP_D1_MAX",
    "SMOOTHSTEP_D2_MAX",
]

# sup |S'| and sup |S''| of the quintic smoothstep on [0, 1]
SMOOTHSTEP_D1_MAX = 30.0 / 16.0
SMOOTHSTEP_D2_MAX = 10.0 * np.sqrt(3.0) / 3.0


def smoothstep(t):
    """Quintic step ``6t^5 - 15t^4 + 10t^3`` clamped to [0, 1], with derivatives.

    Returns ``(S, S', S'')``; the step is C^2 with vanishing first and second
    derivatives at both ends.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    tc = np.clip(t, 0.0, 1.0)
    s = tc ** 3 * (10.0 - 15.0 * tc + 6.0 * tc * tc)
    s1 = np.where(inside, 30.0 * tc * tc * (1.0 - tc) ** 2, 0.0)
    s2 = np.where(inside, 60.0 * tc * (1.0 - tc) * (1.0 - 2.0 * tc), 0.0)
    return s, s1, s2


class Profile:
    """Base class; subclasses of even profiles implement ``_w(s)`` with s = r^2."""

    support = np.inf

    def value(self, r):
        return self._w(np.asarray(r, dtype=float) ** 2)[0]

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r * self._w(r * r)[1]

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        _, w1, w2 = self._w(r * r)
        return 2.0 * w1 + 4.0 * r * r * w2

    def laplacian(self, r, N: int):
        r = np.asarray(r, dtype=float)
        _, w1, w2 = self._w(r * r)
        return 2.0 * N * w1 + 4.0 * r * r * w2

    def _w(self, s):
        raise NotImplementedError


@dataclass
class Gaussian(Profile):
    width: float = 1.0
    amplitude: float = 1.0

    def _w(self, s):
        c = 1.0 / self.width ** 2
        e = self.amplitude * np.exp(-c * s)
        return e, -c * e, c * c * e


@dataclass
class PolyBump(Profile):
    """``amplitude * (1 - (r/radius)^2)_+^power``."""

    radius: float = 1.0
    power: int = 4
    amplitude: float = 1.0

    @property
    def support(self):
        return self.radius

    def _w(self, s):
        a2 = self.radius ** 2
        t = np.clip(1.0 - s / a2, 0.0, None)
        k = self.power
        w = self.amplitude * t ** k
        w1 = -self.amplitude * k * t ** (k - 1) / a2
        w2 = self.amplitude * k * (k - 1) * t ** max(k - 2, 0) / a2 ** 2 if k >= 2 else 0.0 * t
        return w, w1, w2


@dataclass
class SmoothBump(Profile):
    """C-infinity bump ``exp(1 - 1/(1 - (r/radius)^2))`` on the ball of given radius."""

    radius: float = 1.0
    amplitude: float = 1.0

    @property
    def support(self):
        return self.radius

    def _w(self, s):
        a2 = self.radius ** 2
        t = s / a2
        inside = t < 1.0
        one = np.where(inside, 1.0 - t, 1.0)
        w = np.where(inside, self.amplitude * np.exp(1.0 - 1.0 / one), 0.0)
        w1 = -w / one ** 2 / a2
        w2 = w * (1.0 / one ** 4 - 2.0 / one ** 3) / a2 ** 2
        return w, w1, w2


@dataclass
class Plateau(Profile):
    """Equal to 1 on ``[0, inner]``, 0 beyond ``outer``, smoothstep in between."""

    inner: float = 1.0
    outer: float = 2.0

    @property
    def support(self):
        return self.outer

    def _parts(self, r):
        width = self.outer - self.inner
        s, s1, s2 = smoothstep((self.outer - np.asarray(r, dtype=float)) / width)
        return s, -s1 / width, s2 / width ** 2

    def value(self, r):
        return self._parts(r)[0]

    def d1(self, r):
        return self._parts(r)[1]

    def d2(self, r):
        return self._parts(r)[2]

    def laplacian(self, r, N: int):
        r = np.asarray(r, dtype=float)
        _, v1, v2 = self._parts(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            drift = np.where(r > 0, (N - 1) * v1 / r, 0.0)
        return v2 + drift


@dataclass
class PolyTimesBump(Profile):
    """Even polynomial in r times ``(1 - (r/radius)^2)_+^power``.

    ``coefficients[k]`` multiplies ``r^(2k)``.
    """

    coefficients: tuple = (1.0,)
    radius: float = 1.0
    power: int = 3

    @property
    def support(self):
        return self.radius

    def _w(self, s):
        c = np.asarray(self.coefficients, dtype=float)
        P = np.polynomial.Polynomial(c)
        b, b1, b2 = PolyBump(self.radius, self.power)._w(s)
        p0, p1, p2 = P(s), P.deriv(1)(s), P.deriv(2)(s)
        return p0 * b, p1 * b + p0 * b1, p2 * b + 2.0 * p1 * b1 + p0 * b2
