"""Shared types, radial grids and quadrature for radially symmetric problems.

Everything in the package works with radial profiles ``f(|x|)`` on a
truncated interval ``[0, R]``.  Integrals over ``R^N`` reduce to
``N * omega_N * int_0^inf f(r) r^(N-1) dr``; the part beyond ``R`` is handled
analytically for profiles that carry a known power-law tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

__all__ = [
    "ParameterError",
    "DivergentIntegralError",
    "OperatorParams",
    "RadialGrid",
    "RadialFunction",
    "BoundReport",
    "CLOSED_FORM_RTOL",
    "DISCRETIZATION_RTOL",
    "QUADRATURE_ORDER",
    "unit_ball_volume",
    "sphere_area",
    "radial_quadrature",
    "lp_norm",
]

# default slack for BoundReport comparisons
CLOSED_FORM_RTOL = 1e-9
DISCRETIZATION_RTOL = 1e-3

# observed order of the composite rule used by radial_quadrature
QUADRATURE_ORDER = 4


class ParameterError(ValueError):
    """Raised when inputs violate the hypotheses of an operation."""


class DivergentIntegralError(ArithmeticError):
    """The power-law tail of an integrand is not integrable at infinity.

    ``rate`` is the exponent ``k`` of the growth ``int_R^M ~ M^k`` of the
    partial integrals (``k = 0`` means logarithmic growth).
    """

    def __init__(self, message: str, rate: float):
        super().__init__(message)
        self.rate = rate


@dataclass(frozen=True)
class OperatorParams:
    """Dimension ``N``, diffusion exponent ``alpha`` and integrability index ``p``.

    ``p = inf`` stands for the space of continuous functions vanishing at
    infinity.
    """

    N: int
    alpha: float
    p: float = math.inf

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise ParameterError(f"dimension must be an integer >= 3, got {self.N}")
        if not self.alpha > 2:
            raise ParameterError(f"alpha must exceed 2, got {self.alpha}")
        if not (self.p > 1):
            raise ParameterError(f"p must lie in (1, inf], got {self.p}")
        if math.isfinite(self.p) and not self.p > self.N / (self.N - 2):
            raise ParameterError(
                f"p must exceed N/(N-2) = {self.N / (self.N - 2):g}, got {self.p}"
            )

    @property
    def p_conj(self) -> float:
        """Conjugate exponent p/(p-1); equals 1 when p is infinite."""
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def as_dict(self) -> dict:
        return {"N": int(self.N), "alpha": float(self.alpha),
                "p": "inf" if math.isinf(self.p) else float(self.p)}


def unit_ball_volume(N: int) -> float:
    """Lebesgue measure of the unit ball in R^N."""
    if int(N) != N or N < 1:
        raise ParameterError(f"dimension must be a positive integer, got {N}")
    return math.pi ** (N / 2) / math.gamma(N / 2 + 1)


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^(N-1), equal to N * omega_N."""
    return N * unit_ball_volume(N)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    scheme: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ParameterError("a radial grid needs at least three nodes")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise ParameterError("grid nodes must be nonnegative and strictly increasing")
        if self.scheme not in ("uniform", "graded", "adapted"):
            raise ParameterError(f"unknown grid scheme {self.scheme!r}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, R: float, n: int) -> "RadialGrid":
        """``n`` equal cells on ``[0, R]``."""
        return cls(np.linspace(0.0, R, n + 1), "uniform")

    @classmethod
    def graded(cls, R: float, n: int, first_cell: Optional[float] = None) -> "RadialGrid":
        """Geometric spacing on ``[0, R]`` starting from a small first cell.

        The first cell defaults to ``R * 1e-4``.  When ``n`` uniform cells would
        already be finer than that, the uniform grid is returned.
        """
        h0 = R * 1e-4 if first_cell is None else float(first_cell)
        if h0 <= 0:
            raise ParameterError("first cell must be positive")
        if h0 * n >= R:
            return cls.uniform(R, n)
        # solve h0 * (q^n - 1) / (q - 1) = R for log q
        target = R / h0

        def excess(lq):
            return math.expm1(n * lq) / math.expm1(lq) - target

        lq = brentq(excess, 1e-14, math.log1p(target) / (n - 1), xtol=1e-15)
        k = np.arange(0, n + 1)
        nodes = h0 * np.expm1(lq * k) / math.expm1(lq)
        nodes[-1] = R
        return cls(nodes, "graded")

    @classmethod
    def adapted(cls, alpha: float, R: float, n: int) -> "RadialGrid":
        """Nodes equally spaced in ``xi(r) = int_0^r (1 + s^alpha)^(-1/2) ds``.

        The local spacing grows like ``sqrt(1 + r^alpha)``, so the diffusion
        ``(1 + r^alpha) / h(r)^2`` stays bounded along the whole grid.
        """
        return cls(_adapted_nodes(alpha, [R], [n]), "adapted")

    @classmethod
    def adapted_nested(cls, alpha: float, radii, cells_per_unit: float) -> "RadialGrid":
        """Adapted grid on ``[0, max(radii)]`` that contains every radius as a node."""
        radii = sorted(float(r) for r in radii)
        xi = [_intrinsic_length(alpha, r) for r in radii]
        counts = []
        prev = 0.0
        for x in xi:
            counts.append(max(2, int(round((x - prev) * cells_per_unit))))
            prev = x
        return cls(_adapted_nodes(alpha, radii, counts), "adapted")

    @property
    def R(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def __len__(self) -> int:
        return self.size

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        """Largest cell width."""
        return float(np.max(self.spacing))

    def index_of(self, radius: float) -> int:
        i = int(np.argmin(np.abs(self.nodes - radius)))
        if not math.isclose(self.nodes[i], radius, rel_tol=1e-12, abs_tol=1e-14):
            raise ParameterError(f"radius {radius} is not a grid node")
        return i

    def truncate(self, radius: float) -> "RadialGrid":
        """Prefix of the grid ending at the node ``radius``."""
        return RadialGrid(self.nodes[: self.index_of(radius) + 1], self.scheme)

    def coarsen(self, step: int = 2) -> "RadialGrid":
        """Every ``step``-th node; the cell count must be divisible by ``step``."""
        if (self.size - 1) % step:
            raise ParameterError("cell count is not divisible by the coarsening step")
        return RadialGrid(self.nodes[::step], self.scheme)

    def dual_volumes(self, N: int) -> np.ndarray:
        """``int r^(N-1) dr`` over the dual cell of each node (midpoint to midpoint)."""
        r = self.nodes
        mid = np.concatenate(([r[0]], 0.5 * (r[1:] + r[:-1]), [r[-1]]))
        return (mid[1:] ** N - mid[:-1] ** N) / N

    def conductances(self, N: int) -> np.ndarray:
        """Edge weights ``int_{r_i}^{r_{i+1}} r^(N-1) dr / h_i^2``."""
        r = self.nodes
        h = np.diff(r)
        return (r[1:] ** N - r[:-1] ** N) / (N * h * h)


def _intrinsic_length(alpha: float, r: float) -> float:
    return _intrinsic_length_between(alpha, 0.0, r)


def _adapted_nodes(alpha: float, radii, counts) -> np.ndarray:
    # dr/dxi = sqrt(1 + r^alpha), integrated with a high-order explicit solver
    def rhs(_, y):
        return np.sqrt(1.0 + np.abs(y) ** alpha)

    pieces = [np.zeros(1)]
    lo_r, lo_xi = 0.0, 0.0
    for R, n in zip(radii, counts):
        hi_xi = lo_xi + _intrinsic_length_between(alpha, lo_r, R)
        targets = np.linspace(lo_xi, hi_xi, n + 1)
        sol = integrate.solve_ivp(rhs, (lo_xi, targets[-2]), [lo_r], method="DOP853",
                                  t_eval=targets[1:-1], rtol=1e-13, atol=1e-14)
        if not sol.success:
            raise ParameterError(f"could not build adapted grid: {sol.message}")
        pieces.append(sol.y[0])
        pieces.append(np.array([R]))
        lo_r, lo_xi = R, hi_xi
    return np.concatenate(pieces)


def _intrinsic_length_between(alpha: float, a: float, b: float) -> float:
    val, _ = integrate.quad(lambda s: (1.0 + s ** alpha) ** -0.5, a, b,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Grid samples of a radial profile.

    ``decay_exponent = d`` declares the tail ``f(r) ~ c r^(-d)`` beyond the
    last node; without it the profile is taken to vanish beyond ``R``.
    ``derivative`` optionally carries exact values of ``f'`` on the nodes.
    """

    grid: RadialGrid
    values: np.ndarray
    decay_exponent: Optional[float] = None
    derivative: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ParameterError("values must have one entry per grid node")
        object.__setattr__(self, "values", values)
        if self.derivative is not None:
            d = np.asarray(self.derivative, dtype=float)
            if d.shape != values.shape:
                raise ParameterError("derivative must have one entry per grid node")
            object.__setattr__(self, "derivative", d)

    @classmethod
    def sample(cls, grid: RadialGrid, profile, decay_exponent=None) -> "RadialFunction":
        """Sample a profile object exposing ``value`` (and optionally ``d1``)."""
        r = grid.nodes
        deriv = profile.d1(r) if hasattr(profile, "d1") else None
        return cls(grid, profile.value(r), decay_exponent, deriv)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def tail_coefficient(self) -> float:
        """``c`` in ``f ~ c r^(-d)``, averaged over the last two nodes."""
        if self.decay_exponent is None:
            return 0.0
        r = self.nodes[-2:]
        return float(np.mean(self.values[-2:] * r ** self.decay_exponent))

    def scaled(self, factor: float) -> "RadialFunction":
        deriv = None if self.derivative is None else factor * self.derivative
        return RadialFunction(self.grid, factor * self.values, self.decay_exponent, deriv)

    def abs_power(self, p: float) -> "RadialFunction":
        d = None if self.decay_exponent is None else p * self.decay_exponent
        return RadialFunction(self.grid, np.abs(self.values) ** p, d)

    def times_power(self, k: float) -> "RadialFunction":
        """Pointwise product with ``r^k``."""
        r = self.nodes
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r > 0, r ** k, 0.0 if k > 0 else (1.0 if k == 0 else np.inf))
        d = None if self.decay_exponent is None else self.decay_exponent - k
        return RadialFunction(self.grid, self.values * w, d)


def radial_quadrature(f: RadialFunction, N: int, weight_exponent: float = 0.0) -> float:
    """``int_0^inf f(r) r^(N-1+weight_exponent) dr``.

    Composite Simpson rule on the grid plus the analytic integral of the
    declared power tail beyond ``R``.  No factor ``N * omega_N`` is applied.
    """
    r = f.nodes
    k = N - 1 + weight_exponent
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(r > 0, r ** k, 0.0 if k > 0 else 1.0)
    integrand = f.values * w
    if not np.all(np.isfinite(integrand)):
        raise ParameterError("integrand is not finite on the grid")
    body = float(integrate.simpson(integrand, x=r))
    return body + _power_tail(f, N + weight_exponent)


def _power_tail(f: RadialFunction, tail_power: float) -> float:
    """``int_R^inf c r^(tail_power - 1 - d) dr`` for the declared tail of ``f``."""
    if f.decay_exponent is None:
        return 0.0
    c = f.tail_coefficient()
    R = f.grid.R
    rate = tail_power - f.decay_exponent
    if c == 0.0:
        return 0.0
    if rate >= 0:
        raise DivergentIntegralError(
            f"tail r^{rate - 1:g} is not integrable at infinity", rate
        )
    return c * R ** rate / (-rate)


def lp_norm(f: RadialFunction, N: int, p: float, weight_exponent: float = 0.0) -> float:
    """``|| |x|^weight_exponent f ||_p`` over R^N for a radial profile."""
    if math.isinf(p):
        g = f.times_power(weight_exponent)
        if g.decay_exponent is not None and g.decay_exponent < 0 and g.tail_coefficient() != 0:
            raise DivergentIntegralError("weighted profile grows at infinity", -g.decay_exponent)
        return float(np.max(np.abs(g.values)))
    integral = radial_quadrature(f.abs_power(p), N, weight_exponent * p)
    return (sphere_area(N) * max(integral, 0.0)) ** (1.0 / p)


@dataclass
class BoundReport:
    """One inequality checked numerically.

    ``sense='upper'`` asserts ``probe <= closed_form`` and stores
    ``margin = closed_form - probe``; ``sense='lower'`` asserts
    ``probe >= closed_form`` and stores ``margin = probe - closed_form``.
    In both cases ``satisfied`` is ``margin >= -tolerance``.
    A ``closed_form_value`` of ``None`` means only finiteness of the probe is
    asserted.
    """

    bound_name: str
    closed_form_value: Optional[float]
    probe_value: float
    satisfied: bool
    margin: float
    tolerance: float = 0.0
    sense: str = "upper"
    details: dict = field(default_factory=dict)

    @classmethod
    def check(cls, name: str, closed_form: Optional[float], probe: float, *,
              sense: str = "upper", rtol: float = CLOSED_FORM_RTOL, atol: float = 0.0,
              details: Optional[dict] = None) -> "BoundReport":
        if sense not in ("upper", "lower"):
            raise ValueError(f"unknown sense {sense!r}")
        probe = float(probe)
        if closed_form is None:
            ok = bool(np.isfinite(probe))
            return cls(name, None, probe, ok, 0.0 if ok else -math.inf, 0.0, sense,
                       dict(details or {}))
        closed_form = float(closed_form)
        tol = atol + rtol * abs(closed_form)
        margin = closed_form - probe if sense == "upper" else probe - closed_form
        if math.isnan(margin):
            margin = -math.inf
        return cls(name, closed_form, probe, bool(margin >= -tol), float(margin), tol,
                   sense, dict(details or {}))
