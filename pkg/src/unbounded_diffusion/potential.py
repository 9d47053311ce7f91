"""Green's-function resolvent of ``L = (1 + |x|^alpha) Laplacian`` on radial data.

For radial ``f`` the Newtonian potential of ``g = f / (1 + r^alpha)`` reduces
(Newton's theorem: the spherical mean of ``|x - y|^(2-N)`` is
``max(|x|, |y|)^(2-N)``) to

    u(r) = [ r^(2-N) int_0^r g s^(N-1) ds + int_r^inf g s ds ] / (N - 2),

which solves ``-L u = f``.  The package uses this positive convention
throughout, so ``T = (-L)^(-1)`` maps nonnegative data to nonnegative
solutions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .core import (
    BoundReport,
    DivergentIntegralError,
    OperatorParams,
    ParameterError,
    RadialFunction,
    RadialGrid,
    lp_norm,
    sphere_area,
    unit_ball_volume,
)
from .profiles import (SMOOTHSTEP_D1_MAX, SMOOTHSTEP_D2_MAX, Gaussian, Plateau, PolyBump,
                       PolyTimesBump, SmoothBump, smoothstep)

__all__ = [
    "ResolventKernel",
    "WeightedEstimateProbe",
    "newtonian_weight_constant",
    "newtonian_weight_potential",
    "apply_resolvent",
    "apply_gradient_operator",
    "weighted_resolvent_constant",
    "resolvent_norm_bound",
    "verify_weighted_estimate",
    "standard_probe_set",
    "CutoffTemplate",
    "estimate_failure_demo",
    "failure_demo_parts",
]


@dataclass(frozen=True)
class ResolventKernel:
    """Normalization of the convolution form of ``T``.

    In the convolution form ``C_N`` is negative; the radial formula above
    absorbs the sign so that the operator applied here is positive.
    """

    params: OperatorParams

    @property
    def normalization(self) -> float:
        N = self.params.N
        return 1.0 / (N * (2 - N) * unit_ball_volume(N))


def newtonian_weight_constant(N: int, beta: float) -> float:
    """``1 / ((2 - beta)(N - beta))``: the Newtonian potential of ``|y|^(-beta)``
    (with the negative convolution normalization) is this times ``|x|^(2-beta)``.
    """
    if not 2 < beta < N:
        raise ParameterError(f"need 2 < beta < N, got beta={beta}, N={N}")
    return 1.0 / ((2.0 - beta) * (N - beta))


def newtonian_weight_potential(N: int, beta: float, x_norm: float) -> float:
    """``C_N int |x - y|^(2-N) |y|^(-beta) dy`` at ``|x| = x_norm`` by quadrature.

    The spherical mean of the kernel is ``max(r, s)^(2-N)``; the remaining
    radial integral is split at ``s = r`` and evaluated with adaptive
    quadrature (the tail through the substitution ``s = r / t``).
    """
    if not 2 < beta < N:
        raise ParameterError(f"need 2 < beta < N, got beta={beta}, N={N}")
    r = float(x_norm)
    if r <= 0:
        raise ParameterError("x_norm must be positive")
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)
    inner, _ = integrate.quad(lambda s: s ** (N - 1 - beta), 0.0, r, **opts)
    # int_r^inf s^(1-beta) ds with s = r/t
    outer, _ = integrate.quad(lambda t: r ** (2 - beta) * t ** (beta - 3), 0.0, 1.0, **opts)
    total = sphere_area(N) * (r ** (2 - N) * inner + outer)
    return total / (N * (2 - N) * unit_ball_volume(N))


def _green_parts(f: RadialFunction, params: OperatorParams):
    N, alpha = params.N, params.alpha
    r = f.nodes
    g = f.values / (1.0 + r ** alpha)
    inner = _cumulative_moment(r, g, N)
    outer_grid = integrate.cumulative_trapezoid((g * r)[::-1], -r[::-1], initial=0.0)[::-1]
    return r, inner, outer_grid + _far_tail(f, params)


def _cumulative_moment(r, g, N):
    """``int_0^r_i g s^(N-1) ds`` for piecewise-linear ``g``, exact cell by cell.

    The trapezoid rule would leave an ``O(h^2 r^(N-2))`` error that the
    gradient divides by ``r^(N-1)``, i.e. first order next to the origin.
    Gauss-Legendre with ``N//2 + 1`` points integrates the degree-``N``
    polynomial on each cell exactly.
    """
    t, w = np.polynomial.legendre.leggauss(N // 2 + 1)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    a, h = r[:-1, None], np.diff(r)[:, None]
    s_pow = (a + h * t[None, :]) ** (N - 1)
    right = (s_pow * (w * t)[None, :]).sum(axis=1)
    left = (s_pow * (w * (1.0 - t))[None, :]).sum(axis=1)
    cells = h[:, 0] * (g[:-1] * left + g[1:] * right)
    return np.concatenate(([0.0], np.cumsum(cells)))


def _far_tail(f: RadialFunction, params: OperatorParams) -> float:
    """``int_R^inf g(s) s ds`` for the declared power tail of ``f``."""
    if f.decay_exponent is None:
        return 0.0
    c = f.tail_coefficient()
    if c == 0.0:
        return 0.0
    d, alpha, R = f.decay_exponent, params.alpha, f.grid.R
    rate = 2.0 - d - alpha
    if rate >= 0:
        raise DivergentIntegralError(
            f"datum decaying like r^-{d:g} is too slow for the resolvent kernel", rate)
    val, _ = integrate.quad(lambda s: c * s ** (1.0 - d) / (1.0 + s ** alpha), R, np.inf,
                            epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def apply_resolvent(f: RadialFunction, params: OperatorParams) -> RadialFunction:
    """``u = T f`` on the grid of ``f``, tagged with the exact tail ``r^(2-N)``.

    The data are taken piecewise linear; the inner moment is integrated
    exactly against ``s^(N-1)`` and the outer one by the trapezoid rule, so
    ``u`` and ``derivative`` (``u'`` from the same integrals) are both
    second-order accurate in the grid spacing.
    """
    N = params.N
    r, inner, outer = _green_parts(f, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        near = np.where(r > 0, inner * r ** (2.0 - N), 0.0)
    u = (near + outer) / (N - 2)
    return RadialFunction(f.grid, u, float(N - 2), _gradient_values(r, inner, N))


def _gradient_values(r, inner, N):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0, -inner * r ** (1.0 - N), 0.0)


def apply_gradient_operator(f: RadialFunction, params: OperatorParams) -> RadialFunction:
    """Radial derivative ``u'`` of ``u = T f``, i.e. ``-r^(1-N) int_0^r g s^(N-1) ds``.

    Tagged with the tail exponent ``N - 1``; ``u'(0) = 0``.
    """
    r, inner, _ = _green_parts(f, params)
    return RadialFunction(f.grid, _gradient_values(r, inner, params.N), float(params.N - 1))


def _check_weights(params: OperatorParams, beta: float, gamma: float = 0.0):
    if math.isinf(params.p):
        raise ParameterError("the weighted estimates need finite p")
    pc = params.p_conj
    N, alpha = params.N, params.alpha
    if not (0 <= beta <= alpha - 2 and beta < N / pc - 2):
        raise ParameterError(
            f"beta={beta} must satisfy 0 <= beta <= alpha-2 and beta < N/p' - 2 = {N / pc - 2:g}")
    if not (0 <= gamma <= alpha - 1 and gamma < N / pc - 1):
        raise ParameterError(
            f"gamma={gamma} must satisfy 0 <= gamma <= alpha-1 and gamma < N/p' - 1 = {N / pc - 1:g}")


def _weight_sup(alpha: float, beta: float, exact: bool) -> float:
    """Bound on ``sup_v v^(2+beta) / (1 + v^alpha)`` used by the weighted estimate.

    ``exact=False`` returns the printed expression
    ``((2+b)/(a-2+b))^((2+b)/a) (a-2+b)/(a+2b)``, which agrees with the true
    supremum only at ``beta = 0``.  ``exact=True`` returns the true supremum
    ``((2+b)/(a-2-b))^((2+b)/a) (a-2-b)/a`` (equal to 1 when ``b = a-2``).
    """
    k = 2.0 + beta
    if not exact:
        return (k / (alpha - 2.0 + beta)) ** (k / alpha) * (alpha - 2.0 + beta) / (alpha + 2.0 * beta)
    gap = alpha - 2.0 - beta
    if gap <= 0:
        return 1.0
    return (k / gap) ** (k / alpha) * gap / alpha


def weighted_resolvent_constant(params: OperatorParams, beta: float, *, exact_sup: bool = False) -> float:
    """Constant ``C`` in ``|| |x|^beta T f ||_p <= C || f ||_p``.

    ``C = p^2 / ((N + beta p)(Np - N - beta p - 2p)) * s(alpha, beta)`` where
    ``s`` is the weight supremum factor of ``_weight_sup``.  The default uses
    the printed factor; ``exact_sup=True`` substitutes the true supremum.
    """
    _check_weights(params, beta)
    N, p = params.N, params.p
    radial = p * p / ((N + beta * p) * (N * p - N - beta * p - 2 * p))
    return radial * _weight_sup(params.alpha, beta, exact_sup)


def resolvent_norm_bound(params: OperatorParams) -> float:
    """``(2/(alpha-2))^(2/alpha) (alpha-2)/alpha * p^2 / (N(Np - N - 2p))``."""
    if math.isinf(params.p):
        raise ParameterError("the L^p bound needs finite p")
    N, p, a = params.N, params.p, params.alpha
    return (2.0 / (a - 2.0)) ** (2.0 / a) * (a - 2.0) / a * p * p / (N * (N * p - N - 2 * p))


@dataclass
class WeightedEstimateProbe:
    """Weights ``|x|^beta`` (on ``T f``) and ``|x|^gamma`` (on ``S f``) plus data."""

    beta: float
    gamma: float
    probe_functions: Sequence[RadialFunction] = field(default_factory=list)
    exact_sup: bool = False

    def constant(self, params: OperatorParams) -> float:
        return weighted_resolvent_constant(params, self.beta, exact_sup=self.exact_sup)


def verify_weighted_estimate(probe: WeightedEstimateProbe, params: OperatorParams) -> BoundReport:
    """Largest ratio ``|| |x|^beta Tf ||_p / ||f||_p`` over the probes against ``C``.

    The gradient ratios ``|| |x|^gamma Sf ||_p / ||f||_p`` have no closed-form
    comparator; they are recorded in ``details`` and only required finite.
    """
    _check_weights(params, probe.beta, probe.gamma)
    N, p = params.N, params.p
    value_ratios, grad_ratios = [], []
    for f in probe.probe_functions:
        fn = lp_norm(f, N, p)
        if fn == 0.0:
            value_ratios.append(0.0)
            grad_ratios.append(0.0)
            continue
        u = apply_resolvent(f, params)
        du = RadialFunction(f.grid, u.derivative, float(N - 1))
        value_ratios.append(lp_norm(u, N, p, probe.beta) / fn)
        grad_ratios.append(lp_norm(du, N, p, probe.gamma) / fn)
    C = probe.constant(params)
    worst = max(value_ratios, default=0.0)
    report = BoundReport.check(
        f"weighted_resolvent_estimate[beta={probe.beta:g}]", C, worst, sense="upper",
        details={"value_ratios": value_ratios, "gradient_ratios": grad_ratios,
                 "gamma": probe.gamma, "exact_sup": probe.exact_sup})
    if not all(np.isfinite(grad_ratios)):
        report.satisfied = False
    return report


def standard_probe_set(R: float = 40.0, n: int = 4000) -> list:
    """Ten radial data on one graded grid: bumps, plateaus, Gaussians and two sign-changing profiles."""
    grid = RadialGrid.graded(R, n, first_cell=1e-3)
    shapes = [
        Gaussian(0.5), Gaussian(1.0), Gaussian(3.0),
        PolyBump(1.0, 4), PolyBump(4.0, 3),
        SmoothBump(2.0), Plateau(1.0, 2.0), Plateau(5.0, 8.0),
        PolyTimesBump((1.0, -3.0), 2.0, 4), PolyTimesBump((0.5, 0.0, -0.4), 3.0, 3),
    ]
    return [RadialFunction.sample(grid, s) for s in shapes]


@dataclass(frozen=True)
class CutoffTemplate:
    """Cutoff equal to 1 on ``[2, R]``, rising on ``[1, 2]``, falling on ``[R, 2R]``.

    Built from the quintic smoothstep, so ``|phi'| <= d1_max / R`` and
    ``|phi''| <= d2_max / R^2`` on the outer transition.
    """

    R: float
    d1_max: float = SMOOTHSTEP_D1_MAX
    d2_max: float = SMOOTHSTEP_D2_MAX

    def __call__(self, r):
        """``(phi, phi', phi'')`` at ``r``."""
        r = np.asarray(r, dtype=float)
        R = self.R
        rise = smoothstep(r - 1.0)
        t = (2.0 * R - r) / R
        fall = smoothstep(t)
        lo = r <= 2.0
        phi = np.where(lo, rise[0], fall[0])
        d1 = np.where(lo, rise[1], -fall[1] / R)
        d2 = np.where(lo, rise[2], fall[2] / R ** 2)
        return phi, d1, d2


def _failure_integrals(params: OperatorParams, R: float):
    N, p, alpha = params.N, params.p, params.alpha
    phi = CutoffTemplate(R)

    def grad(r):
        ph, d1, _ = phi(r)
        return d1 * r ** (2 - N) + (2 - N) * ph * r ** (1 - N)

    def lap(r):
        _, d1, d2 = phi(r)
        return d2 * r ** (2 - N) + (3 - N) * d1 * r ** (1 - N)

    def num(r):
        return np.abs((1 + r ** (alpha - 1)) * grad(r)) ** p * r ** (N - 1)

    def den(r):
        return np.abs((1 + r ** alpha) * lap(r)) ** p * r ** (N - 1)

    opts = dict(epsabs=0.0, epsrel=1e-11, limit=400)
    edges = [1.0, 2.0, R, 2.0 * R]
    top = sum(integrate.quad(num, a, b, **opts)[0] for a, b in zip(edges[:-1], edges[1:]))
    bottom = sum(integrate.quad(den, a, b, **opts)[0] for a, b in ((1.0, 2.0), (R, 2.0 * R)))
    area = sphere_area(N)
    return area * top, area * bottom


def estimate_failure_demo(params: OperatorParams, R_values: Sequence[float]) -> list:
    """Ratios ``||(1 + r^(alpha-1)) u_R'||_p / ||L u_R||_p`` for ``u_R = phi_R r^(2-N)``.

    Only meaningful at the critical exponent ``alpha = N/p'`` where the
    numerator grows like ``(log R)^(1/p)`` while the denominator stays bounded.
    Returns ``[(R, ratio), ...]``.
    """
    if math.isinf(params.p):
        raise ParameterError("the failure demo needs finite p")
    critical = params.N / params.p_conj
    if abs(params.alpha - critical) > 1e-12:
        raise ParameterError(f"alpha must equal N/p' = {critical:g}, got {params.alpha}")
    R_values = [float(R) for R in R_values]
    if any(R < 2 for R in R_values) or any(b <= a for a, b in zip(R_values, R_values[1:])):
        raise ParameterError("R_values must be >= 2 and strictly increasing")
    out = []
    for R in R_values:
        top, bottom = _failure_integrals(params, R)
        out.append((R, (top / bottom) ** (1.0 / params.p)))
    return out


def failure_demo_parts(params: OperatorParams, R: float) -> tuple:
    """Numerator and denominator (p-th powers) of the failure-demo ratio at ``R``."""
    return _failure_integrals(params, float(R))
