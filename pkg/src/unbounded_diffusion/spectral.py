"""Discrete spectrum of ``L`` in ``L^2(mu)``, ``d mu = dx / (1 + |x|^alpha)``.

In the angular channel ``ell`` the form ``int |grad u|^2 dx`` reduces to

    int_0^R (u'^2 + ell (ell + N - 2) u^2 / r^2) r^(N-1) dr,

and the mass to ``int_0^R u^2 r^(N-1) / (1 + r^alpha) dr``.  Piecewise linear
elements give the stiffness (exact for the gradient part), the mass is
lumped at the nodes with dual-cell volumes, and ``u(R) = 0``.  Eigenvalues
of ``L`` are the negatives ``lam = -kappa`` of the pencil eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .core import (
    BoundReport,
    DISCRETIZATION_RTOL,
    OperatorParams,
    ParameterError,
    RadialGrid,
    sphere_area,
)
from .tridiag import TridiagonalPencil, inverse_iteration, pencil_eigenvalues

__all__ = [
    "SingularMassError",
    "SpectralProblem",
    "SpectralResult",
    "EigenvalueBounds",
    "assemble_generalized_problem",
    "compute_spectrum",
    "extrapolate_in_radius",
    "default_radius",
    "default_problem",
    "eigenvalue_bounds",
    "check_bounds",
    "channel_ordering_report",
    "sobolev_constant",
    "weight_norm_factor",
    "robin_ball_limit",
]


class SingularMassError(ArithmeticError):
    """A lumped mass entry underflowed to zero."""


def default_radius(N: int) -> float:
    """Radius where ``r^(2-N)`` has dropped to ``1e-4``, but at least 10.

    In high dimension the first radius alone sits inside the region where
    the weight still shapes the eigenfunction (``4.6`` for ``N = 8``).
    """
    return max(1e4 ** (1.0 / (N - 2)), 10.0)


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    params: OperatorParams
    ell: int
    grid: RadialGrid
    k: int = 1

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 0:
            raise ParameterError("angular channel must be a nonnegative integer")
        if self.k < 1:
            raise ParameterError("need at least one eigenvalue")

    @property
    def channel_potential(self) -> float:
        return self.ell * (self.ell + self.params.N - 2)


def default_problem(params: OperatorParams, ell: int = 0, R: Optional[float] = None,
                    n: int = 2000, k: int = 1) -> SpectralProblem:
    """Graded grid on ``[0, R]`` with a first cell of ``min(1e-3, R 1e-4)``."""
    R = default_radius(params.N) if R is None else float(R)
    grid = RadialGrid.graded(R, n, min(1e-3, R * 1e-4))
    return SpectralProblem(params, ell, grid, k)


def assemble_generalized_problem(problem: SpectralProblem) -> TridiagonalPencil:
    """Stiffness and lumped mass on the free nodes.

    The Dirichlet node ``r = R`` is always removed; for ``ell >= 1`` the
    regularity condition ``u(0) = 0`` removes the origin as well.
    """
    N, alpha = problem.params.N, problem.params.alpha
    grid = problem.grid
    r = grid.nodes
    cond = grid.conductances(N)
    vol = grid.dual_volumes(N)
    d = np.zeros(r.size)
    d[:-1] += cond
    d[1:] += cond
    e = -cond.copy()
    pot = problem.channel_potential
    if pot:
        mid = np.concatenate(([r[0]], 0.5 * (r[1:] + r[:-1]), [r[-1]]))
        d += pot * (mid[1:] ** (N - 2) - mid[:-1] ** (N - 2)) / (N - 2)
    with np.errstate(over="ignore"):
        m = vol / (1.0 + r ** alpha)
    first = 1 if problem.ell >= 1 else 0
    d, e, m = d[first:-1], e[first:-1], m[first:-1]
    if np.any(m <= 0) or not np.all(np.isfinite(m)):
        bad = float(r[first:-1][np.argmax(m <= 0)])
        raise SingularMassError(
            f"lumped mass underflows at r = {bad:.4g}; reduce R for alpha = {alpha:g}")
    return TridiagonalPencil(d, e, m)


@dataclass
class SpectralResult:
    eigenvalues: List[float]
    ell: int
    R: float
    n_grid: int
    extrapolated_lambda1: float
    coarse_lambda1: float
    eigenvector: Optional[np.ndarray] = None
    free_nodes: Optional[np.ndarray] = None
    params: Optional[OperatorParams] = None
    radius_extrapolated: bool = False
    details: dict = field(default_factory=dict)

    @property
    def lambda1(self) -> float:
        return self.eigenvalues[0]


# observed order of the scheme in the mesh width (P1 stiffness, lumped mass)
GRID_ORDER = 2


def _kappas(problem: SpectralProblem, k: int):
    pencil = assemble_generalized_problem(problem)
    return pencil, pencil_eigenvalues(pencil, k, positive=True)


def compute_spectrum(problem: SpectralProblem, *, with_vector: bool = True) -> SpectralResult:
    """``k`` eigenvalues closest to zero, plus ``lambda_1`` Richardson-extrapolated in ``h``.

    The coarse grid keeps every second node; the extrapolation assumes the
    second-order error of the scheme.
    """
    pencil, kap = _kappas(problem, problem.k)
    fine = -float(kap[0])
    lam = [-float(x) for x in kap]
    coarse = math.nan
    ext = fine
    if (problem.grid.size - 1) % 2 == 0 and problem.grid.size >= 7:
        coarse_problem = SpectralProblem(problem.params, problem.ell, problem.grid.coarsen(2), 1)
        coarse = -float(_kappas(coarse_problem, 1)[1][0])
        ext = fine + (fine - coarse) / (2 ** GRID_ORDER - 1)
    vec = nodes = None
    if with_vector:
        vec = inverse_iteration(pencil, float(kap[0]))
        first = 1 if problem.ell >= 1 else 0
        nodes = problem.grid.nodes[first:-1]
    return SpectralResult(lam, problem.ell, problem.grid.R, problem.grid.size - 1, ext, coarse,
                          vec, nodes, problem.params)


def extrapolate_in_radius(params: OperatorParams, radii: Optional[Sequence[float]] = None,
                          ell: int = 0, n: int = 2000) -> SpectralResult:
    """Grid-extrapolated ``lambda_1`` at two radii, then extrapolated in ``R``.

    Beyond the region where the weight matters the eigenfunction is
    harmonic and decays like ``r^(2-N)``; the Dirichlet truncation error then
    scales like ``R^(2-N)``, so ``lam(R) = lam_inf + c R^(2-N)`` is solved
    from the two radii (default ``R`` and ``2R`` with ``R = default_radius(N)``).
    """
    if radii is None:
        R0 = default_radius(params.N)
        radii = (R0, 2.0 * R0)
    R1, R2 = sorted(float(R) for R in radii)[:2]
    res1 = compute_spectrum(default_problem(params, ell, R1, n), with_vector=False)
    res2 = compute_spectrum(default_problem(params, ell, R2, n))
    w1, w2 = R1 ** (params.N - 2), R2 ** (params.N - 2)
    lam_inf = (res2.extrapolated_lambda1 * w2 - res1.extrapolated_lambda1 * w1) / (w2 - w1)
    res2.details.update({"radii": [R1, R2],
                         "grid_extrapolated": [res1.extrapolated_lambda1, res2.extrapolated_lambda1]})
    res2.extrapolated_lambda1 = float(lam_inf)
    res2.radius_extrapolated = True
    return res2


def sobolev_constant(N: int) -> float:
    """``C_2^2`` in ``||u||_(2N/(N-2))^2 <= C_2^2 ||grad u||_2^2`` (Talenti's value)."""
    return (math.gamma(N) / math.gamma(N / 2.0)) ** (2.0 / N) / (math.pi * N * (N - 2))


def weight_norm_factor(params: OperatorParams) -> float:
    """``(int (1 + |x|^alpha)^(-N/2) dx)^(2/N)`` by radial quadrature."""
    N, a = params.N, params.alpha

    def f(r):
        return r ** (N - 1) * (1.0 + r ** a) ** (-N / 2.0)

    head, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    # r = 1/t on (1, inf): r^(N-1) (1+r^a)^(-N/2) dr = t^(aN/2 - N - 1) (t^a + 1)^(-N/2) dt
    tail, _ = integrate.quad(lambda t: (t ** a + 1.0) ** (-N / 2.0), 0.0, 1.0,
                             weight="alg", wvar=(a * N / 2.0 - N - 1.0, 0.0),
                             epsabs=0.0, epsrel=1e-13, limit=200)
    return (sphere_area(N) * (head + tail)) ** (2.0 / N)


@dataclass
class EigenvalueBounds:
    """Closed-form bounds on ``lambda_1``; all three are upper bounds on ``lambda_1``.

    ``sobolev_bound = -1 / (sobolev_constant * weight_factor)``.
    """

    lp_norm_bound: float
    sup_norm_bound: float
    sobolev_bound: float
    weight_factor: float
    sobolev_constant: float

    @property
    def sharper_upper(self) -> str:
        return "lp_norm_bound" if self.lp_norm_bound < self.sup_norm_bound else "sup_norm_bound"


def eigenvalue_bounds(params: OperatorParams) -> EigenvalueBounds:
    N, a = params.N, params.alpha
    b1 = -((a - 2.0) / 2.0) ** (2.0 / a) * (a / (a - 2.0)) * (N - 2) ** 2 / 4.0
    b2 = -(N - 2) * a * math.sin(2.0 * math.pi / a) / math.pi
    C = sobolev_constant(N)
    L = weight_norm_factor(params)
    return EigenvalueBounds(b1, b2, -1.0 / (C * L), L, C)


def check_bounds(result: SpectralResult, bounds: EigenvalueBounds,
                 rtol: float = DISCRETIZATION_RTOL) -> List[BoundReport]:
    """``lambda_1 <= lp_norm_bound``, ``lambda_1 <= sup_norm_bound`` and
    ``-lambda_1 >= 1 / (C_2^2 L)``, each with relative slack ``rtol``."""
    if result.ell != 0:
        raise ParameterError("the bounds concern the radial channel ell = 0")
    lam = result.extrapolated_lambda1
    info = {"sharper_upper": bounds.sharper_upper, "R": result.R, "n_grid": result.n_grid}
    return [
        BoundReport.check("lambda1_le_lp_norm_bound", bounds.lp_norm_bound, lam,
                          sense="upper", rtol=rtol, details=info),
        BoundReport.check("lambda1_le_sup_norm_bound", bounds.sup_norm_bound, lam,
                          sense="upper", rtol=rtol, details=info),
        BoundReport.check("minus_lambda1_ge_sobolev_bound", -bounds.sobolev_bound, -lam,
                          sense="lower", rtol=rtol, details=info),
    ]


def channel_ordering_report(params: OperatorParams, R: Optional[float] = None, n: int = 2000,
                            channels: Sequence[int] = (1, 2)) -> BoundReport:
    """Check that no higher channel has a first eigenvalue closer to zero than ``ell = 0``."""
    lam0 = compute_spectrum(default_problem(params, 0, R, n), with_vector=False).lambda1
    others = {ell: compute_spectrum(default_problem(params, ell, R, n), with_vector=False).lambda1
              for ell in channels}
    worst = max(others.values())
    return BoundReport.check("radial_channel_carries_lambda1", lam0, worst, sense="upper",
                             rtol=0.0, details={"lambda1_by_channel": {0: lam0, **others}})


def robin_ball_limit(N: int) -> float:
    """``-kappa`` for ``-Laplacian`` on the unit ball with ``u' + (N-2) u = 0`` on the sphere.

    This is the large-alpha limit of ``lambda_1``: the weight vanishes outside
    the ball, where the minimizer is the decaying harmonic extension, whose
    energy turns the exterior into this boundary condition.  With the radial
    eigenfunction ``r^(-nu) J_nu(k r)``, ``nu = N/2 - 1``, the condition reads
    ``k J_nu'(k) + nu J_nu(k) = k J_(nu-1)(k) = 0``, so ``k`` is the first
    positive zero of ``J_(N/2-2)`` (``pi/2`` for ``N = 3``).
    """
    from scipy.optimize import brentq

    order = N / 2.0 - 2.0
    x = np.linspace(1e-3, 40.0, 40000)
    v = special.jv(order, x)
    i = int(np.argmax(np.sign(v[1:]) != np.sign(v[:-1])))
    k = brentq(lambda t: special.jv(order, t), x[i], x[i + 1], xtol=1e-15)
    return -k * k
