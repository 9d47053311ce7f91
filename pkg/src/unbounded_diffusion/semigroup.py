"""Parabolic problems ``u_t = (1 + r^alpha) Laplacian u`` on balls ``B(rho)``.

The spatial operator is the conservative discretization already used for
the spectrum: ``M u' = -K u`` with the P1 stiffness ``K`` (measure
``r^(N-1) dr``) and the lumped mass ``M_i = V_i / (1 + r_i^alpha)``.  ``K``
has nonpositive off-diagonals and nonnegative row sums, so ``-M^(-1) K`` is
a Metzler matrix.  Crank-Nicolson with ``dt <= 2 min_i M_i / K_ii`` keeps
both half-steps monotone, which gives the discrete maximum principle
exactly: positivity, sup-norm contraction and comparison between balls.

Grids are equally spaced in ``xi(r) = int_0^r (1 + s^alpha)^(-1/2) ds``, so the
step limit is roughly uniform along the grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

from .core import (
    BoundReport,
    OperatorParams,
    ParameterError,
    RadialFunction,
    RadialGrid,
    sphere_area,
)
from .potential import apply_resolvent

__all__ = [
    "InstabilityError",
    "MonotonicityError",
    "BallOperator",
    "SemigroupRun",
    "solve_on_ball",
    "solve_with_source",
    "expanding_ball_limit",
    "lp_contraction_check",
    "sup_contraction_check",
    "steady_state_report",
    "DEFAULT_CELLS_PER_UNIT",
]

# cells per unit of the intrinsic length xi
DEFAULT_CELLS_PER_UNIT = 100.0
# monotone-step limit is applied with this safety factor
STEP_SAFETY = 1.0 - 1e-9


class InstabilityError(ArithmeticError):
    """The sup-norm grew between two steps."""


class MonotonicityError(ArithmeticError):
    """Solutions on nested balls failed to increase with the radius."""


@dataclass(frozen=True, eq=False)
class BallOperator:
    """Discrete generator on the free nodes of a grid ending at ``rho`` (Dirichlet there)."""

    params: OperatorParams
    grid: RadialGrid

    @property
    def rho(self) -> float:
        return self.grid.R

    def matrices(self):
        N, alpha = self.params.N, self.params.alpha
        r = self.grid.nodes
        cond = self.grid.conductances(N)
        d = np.zeros(r.size)
        d[:-1] += cond
        d[1:] += cond
        with np.errstate(over="ignore"):
            m = self.grid.dual_volumes(N) / (1.0 + r ** alpha)
        if np.any(m[:-1] <= 0):
            raise ParameterError("lumped mass underflows on this ball; reduce rho")
        return d[:-1], -cond[:-1], m[:-1]

    def step_limit(self) -> float:
        """Largest step keeping the explicit half of Crank-Nicolson monotone."""
        d, _, m = self.matrices()
        return float(2.0 * np.min(m / d))


def _banded(d, e, scale_diag, scale_off):
    n = d.size
    ab = np.zeros((3, n))
    ab[0, 1:] = scale_off * e
    ab[1] = scale_diag + d * scale_off
    ab[2, :-1] = scale_off * e
    return ab


def _apply(d, e, u):
    out = d * u
    out[:-1] += e * u[1:]
    out[1:] += e * u[:-1]
    return out


@dataclass
class SemigroupRun:
    params: OperatorParams
    rho: float
    dt: float
    T_end: float
    grid: RadialGrid
    snapshots: List[Tuple[float, RadialFunction]] = field(default_factory=list)
    norm_trace: List[Tuple[float, float, float]] = field(default_factory=list)
    trace_p: float = math.inf
    substeps: int = 1
    theta: float = 0.5

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, *_ in self.norm_trace])

    def final(self) -> RadialFunction:
        return self.snapshots[-1][1]

    def snapshot_at(self, t: float) -> RadialFunction:
        for ts, f in self.snapshots:
            if math.isclose(ts, t, rel_tol=1e-12, abs_tol=1e-15):
                return f
        raise KeyError(f"no snapshot at t = {t}")


def _discrete_norms(values, vol, N, p):
    sup = float(np.max(np.abs(values)))
    if math.isinf(p):
        return sup, sup
    return sup, float((sphere_area(N) * np.sum(vol * np.abs(values) ** p)) ** (1.0 / p))


def _initial_values(f0, grid: RadialGrid) -> np.ndarray:
    r = grid.nodes
    if isinstance(f0, RadialFunction):
        if f0.grid.size == grid.size and np.allclose(f0.nodes, r, rtol=1e-13, atol=0):
            u = f0.values.copy()
        else:
            u = np.interp(r, f0.nodes, f0.values, right=0.0)
    elif hasattr(f0, "value"):
        u = np.asarray(f0.value(r), dtype=float).copy()
    else:
        u = np.asarray(f0(r), dtype=float).copy()
    u[-1] = 0.0
    return u


def _ball_grid(params: OperatorParams, rho: float, grid: Optional[RadialGrid],
               cells_per_unit: float) -> RadialGrid:
    if grid is not None:
        if not math.isclose(grid.R, rho, rel_tol=1e-12):
            raise ParameterError("grid must end at rho")
        return grid
    from .core import _intrinsic_length

    n = max(8, int(round(_intrinsic_length(params.alpha, rho) * cells_per_unit)))
    return RadialGrid.adapted(params.alpha, rho, n)


def _march(params, grid, u0, dt, T_end, snapshot_times, theta, source, p, check):
    op = BallOperator(params, grid)
    d, e, m = op.matrices()
    vol = grid.dual_volumes(params.N)[:-1]
    limit = op.step_limit() * STEP_SAFETY if theta < 1.0 else math.inf
    if theta < 1.0:
        limit /= 2.0 * (1.0 - theta)
    sub = max(1, int(math.ceil(dt / limit - 1e-12)))
    h = dt / sub
    times = sorted(set([float(t) for t in (snapshot_times or [])] + [float(T_end)]))
    if times[0] < 0:
        raise ParameterError("snapshot times must be nonnegative")

    cache = {}

    def factor(step):
        if step not in cache:
            cache[step] = _banded(d, e, m, theta * step)
        return cache[step]

    rhs_src = None if source is None else m * source
    u = u0[:-1].copy()
    snaps = []
    trace = []
    sup0, pn0 = _discrete_norms(u, vol, params.N, p)
    trace.append((0.0, sup0, pn0))
    t = 0.0
    if times[0] == 0.0:
        snaps.append((0.0, _wrap(grid, u)))
    for target in times:
        while t < target * (1 - 1e-14) - 1e-300:
            step = min(h, target - t)
            if target - (t + step) < 1e-12 * h:
                step = target - t
            rhs = m * u - (1.0 - theta) * step * _apply(d, e, u)
            if rhs_src is not None:
                rhs += step * rhs_src
            u = solve_banded((1, 1), factor(step), rhs)
            t += step
            sup, pn = _discrete_norms(u, vol, params.N, p)
            if check and source is None and sup > trace[-1][1] * (1.0 + 1e-8) + 1e-300:
                raise InstabilityError(f"sup-norm grew from {trace[-1][1]:.6g} to {sup:.6g} at t = {t:.4g}")
            trace.append((t, sup, pn))
        if target > 0.0 or not snaps:
            snaps.append((target, _wrap(grid, u)))
    return snaps, trace, sub, h


def _wrap(grid, u):
    return RadialFunction(grid, np.append(u, 0.0))


def solve_on_ball(f0, params: OperatorParams, rho: float, dt: float, T_end: float, *,
                  snapshot_times: Optional[Sequence[float]] = None, p: Optional[float] = None,
                  grid: Optional[RadialGrid] = None, theta: float = 0.5,
                  cells_per_unit: float = DEFAULT_CELLS_PER_UNIT,
                  check: bool = True) -> SemigroupRun:
    """Crank-Nicolson (``theta = 1/2``) solution with ``u(rho) = 0``.

    Steps larger than the monotone limit are split into equal substeps;
    ``run.dt`` is the requested step and ``run.substeps`` the split.  The norm
    trace records ``(t, sup norm, L^p norm)`` after every substep, with
    ``p = params.p`` unless given.
    """
    if dt <= 0 or T_end < 0:
        raise ParameterError("need dt > 0 and T_end >= 0")
    if not 0.5 <= theta <= 1.0:
        raise ParameterError("theta must lie in [1/2, 1]")
    grid = _ball_grid(params, rho, grid, cells_per_unit)
    p = params.p if p is None else float(p)
    u0 = _initial_values(f0, grid)
    snaps, trace, sub, _ = _march(params, grid, u0, dt, T_end, snapshot_times, theta, None, p, check)
    return SemigroupRun(params, float(rho), float(dt), float(T_end), grid, snaps, trace, p, sub, theta)


def solve_with_source(f, params: OperatorParams, rho: float, dt: float, T_end: float, *,
                      u0=None, theta: float = 1.0, grid: Optional[RadialGrid] = None,
                      cells_per_unit: float = DEFAULT_CELLS_PER_UNIT) -> SemigroupRun:
    """``u_t = L u + f`` on ``B(rho)`` with ``u(rho) = 0``; backward Euler by default.

    Backward Euler is monotone for every step, so large steps drive the run
    to the discrete steady state ``K u = M f``.
    """
    grid = _ball_grid(params, rho, grid, cells_per_unit)
    src = _initial_values(f, grid)[:-1]
    start = np.zeros(grid.size) if u0 is None else _initial_values(u0, grid)
    snaps, trace, sub, _ = _march(params, grid, start, dt, T_end, None, theta, src, params.p, False)
    return SemigroupRun(params, float(rho), float(dt), float(T_end), grid, snaps, trace,
                        params.p, sub, theta)


def _nested_grid(params, rhos, cells_per_unit):
    return RadialGrid.adapted_nested(params.alpha, rhos, cells_per_unit)


def expanding_ball_limit(f0, params: OperatorParams, rho_sequence: Sequence[float], t_probe: float,
                         *, dt: Optional[float] = None, cells_per_unit: float = DEFAULT_CELLS_PER_UNIT,
                         tol: float = 1e-10) -> List[Tuple[float, RadialFunction]]:
    """Solutions at ``t_probe`` on increasing balls, restricted to the smallest ball.

    All balls share one nested grid and one time step, so the discrete
    comparison principle applies node by node.  Raises ``MonotonicityError``
    if some solution drops below the one on a smaller ball by more than
    ``tol`` (relative to the data's sup norm).
    """
    rhos = [float(r) for r in rho_sequence]
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ParameterError("rho_sequence must be strictly increasing")
    big = _nested_grid(params, rhos, cells_per_unit)
    limit = BallOperator(params, big).step_limit() * STEP_SAFETY
    step = limit if dt is None else min(float(dt), limit)
    common = big.truncate(rhos[0])
    out = []
    scale = None
    for rho in rhos:
        g = big.truncate(rho)
        run = solve_on_ball(f0, params, rho, step, t_probe, grid=g)
        if scale is None:
            scale = max(run.norm_trace[0][1], 1e-300)
        vals = run.final().values[: common.size]
        out.append((rho, RadialFunction(common, vals)))
    for (r1, a), (r2, b) in zip(out, out[1:]):
        worst = float(np.max(a.values - b.values))
        if worst > tol * scale:
            raise MonotonicityError(f"solution on B({r2:g}) falls below B({r1:g}) by {worst:.3g}")
    return out


def _increase_report(name, series, ref, atol):
    series = np.asarray(series, dtype=float)
    inc = np.diff(series) / max(ref, 1e-300)
    worst = float(np.max(inc)) if inc.size else 0.0
    return BoundReport.check(name, 0.0, worst, sense="upper", rtol=0.0, atol=atol,
                             details={"steps": int(inc.size)})


def lp_contraction_check(run: SemigroupRun, p: float, atol: float = 1e-10) -> BoundReport:
    """Largest per-step increase of the ``L^p`` norm, relative to the initial norm."""
    if math.isinf(p):
        return sup_contraction_check(run, atol)
    if not run.trace_p == p:
        raise ParameterError(f"run traced p = {run.trace_p}; solve again with p = {p}")
    N = run.params.N
    if not p > N / (N - 2):
        raise ParameterError(f"p must exceed N/(N-2) = {N / (N - 2):g}")
    series = [pn for _, _, pn in run.norm_trace]
    return _increase_report(f"lp_contraction[p={p:g}]", series, series[0], atol)


def sup_contraction_check(run: SemigroupRun, atol: float = 1e-10) -> BoundReport:
    series = [s for _, s, _ in run.norm_trace]
    return _increase_report("sup_contraction", series, series[0], atol)


def steady_state_report(f, params: OperatorParams, rho: float, *, dt: float = 1e3, steps: int = 4,
                        cells_per_unit: float = DEFAULT_CELLS_PER_UNIT,
                        rtol: float = 1e-3) -> BoundReport:
    """Long-time limit of ``u_t = L u + f`` on ``B(rho)`` against the resolvent.

    On the ball the exact steady state is ``T f - (T f)(rho)``, since constants
    are annihilated by ``L``.  The report compares sup norms of the
    difference and of the reference.
    """
    run = solve_with_source(f, params, rho, dt, dt * steps, cells_per_unit=cells_per_unit)
    grid = run.grid
    vals = _initial_values(f, grid)
    ref = apply_resolvent(RadialFunction(grid, vals), params)
    target = ref.values - ref.values[-1]
    err = float(np.max(np.abs(run.final().values - target)))
    scale = float(np.max(np.abs(target)))
    return BoundReport.check("steady_state_matches_resolvent", 0.0, err / scale, sense="upper",
                             rtol=0.0, atol=rtol,
                             details={"rho": rho, "reference_sup": scale, "resolvent_at_rho": float(ref.values[-1])})
