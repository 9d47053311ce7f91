"""Eigenvalues of the symmetric tridiagonal pencil ``K x = lam M x`` with ``M`` diagonal.

Bisection on Sturm counts of ``K - x M`` directly, without forming
``M^(-1/2) K M^(-1/2)``: the mass entries of the radial problems span hundreds
of orders of magnitude, and symmetrizing would overflow long before the
pencil itself becomes ill-posed.  Eigenvectors come from inverse iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "ConvergenceError",
    "sturm_count",
    "gershgorin_interval",
    "pencil_eigenvalues",
    "inverse_iteration",
    "TridiagonalPencil",
]

_PIVMIN = 1e-300


class ConvergenceError(ArithmeticError):
    """Bisection or inverse iteration did not reach the requested tolerance."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class TridiagonalPencil:
    """``K`` with diagonal ``d`` and off-diagonal ``e``; ``M = diag(m)``, ``m > 0``."""

    d: np.ndarray
    e: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        d, e, m = (np.asarray(a, dtype=float) for a in (self.d, self.e, self.m))
        if e.size != d.size - 1 or m.size != d.size:
            raise ValueError("inconsistent pencil sizes")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "m", m)

    @property
    def size(self) -> int:
        return int(self.d.size)

    def stiffness_form(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(u @ (self.d * u) + 2.0 * np.sum(self.e * u[:-1] * u[1:]))

    def mass_form(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(np.sum(self.m * u * u))

    def rayleigh_quotient(self, u) -> float:
        return self.stiffness_form(u) / self.mass_form(u)


def sturm_count(pencil: TridiagonalPencil, x) -> np.ndarray:
    """Number of eigenvalues strictly below each shift in ``x``.

    Counts negative pivots of the LDL^T factorization of ``K - x M``
    (Sylvester's law of inertia, valid because ``M`` is positive).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d, m = pencil.d, pencil.m
    e2 = pencil.e ** 2
    q = d[0] - x * m[0]
    count = (q < 0).astype(int)
    for i in range(1, d.size):
        q = np.where(np.abs(q) < _PIVMIN, -_PIVMIN, q)
        q = d[i] - x * m[i] - e2[i - 1] / q
        count += q < 0
    return count


def gershgorin_interval(pencil: TridiagonalPencil):
    """Interval containing every eigenvalue, from Gershgorin discs of ``M^(-1) K``."""
    rad = np.zeros_like(pencil.d)
    rad[:-1] += np.abs(pencil.e)
    rad[1:] += np.abs(pencil.e)
    lo = np.min((pencil.d - rad) / pencil.m)
    hi = np.max((pencil.d + rad) / pencil.m)
    return float(lo), float(hi)


def pencil_eigenvalues(pencil: TridiagonalPencil, k: int, *, positive: bool = False,
                       rtol: float = 1e-14, sections: int = 15, max_sweeps: int = 200
                       ) -> np.ndarray:
    """The ``k`` smallest eigenvalues by multisection of Sturm counts.

    Each sweep evaluates ``sections`` shifts inside every unresolved bracket at
    once.  With ``positive=True`` the pencil is known to be positive definite
    and zero is used as the lower end; the upper end is found by doubling.
    """
    if not 1 <= k <= pencil.size:
        raise ValueError(f"k must lie in [1, {pencil.size}]")
    if positive:
        lo0 = 0.0
    else:
        lo0 = gershgorin_interval(pencil)[0]
        lo0 -= abs(lo0) * 1e-12 + 1e-300
    hi0 = max(abs(lo0), 1.0)
    grow = 0
    while sturm_count(pencil, hi0)[0] < k:
        hi0 = 2.0 * hi0 + abs(lo0)
        grow += 1
        if grow > 2000 or not np.isfinite(hi0):
            raise ConvergenceError("no upper bracket for the requested eigenvalues",
                                   {"upper": hi0, "k": k})
    lo = np.full(k, lo0)
    hi = np.full(k, hi0)
    target = np.arange(1, k + 1)
    frac = np.arange(1, sections + 1) / (sections + 1.0)
    for sweep in range(max_sweeps):
        width = hi - lo
        scale = np.maximum(np.abs(lo), np.abs(hi))
        active = width > rtol * scale
        if not np.any(active):
            return 0.5 * (lo + hi)
        idx = np.flatnonzero(active)
        shifts = lo[idx, None] + width[idx, None] * frac[None, :]
        counts = sturm_count(pencil, shifts.ravel()).reshape(shifts.shape)
        for row, j in enumerate(idx):
            # first shift whose count reaches the target index bounds lam_j from above
            above = counts[row] >= target[j]
            pos = int(np.argmax(above)) if np.any(above) else sections
            if pos < sections:
                hi[j] = shifts[row, pos]
            if pos > 0:
                lo[j] = shifts[row, pos - 1]
    raise ConvergenceError("bisection did not converge",
                           {"sweeps": max_sweeps, "widths": (hi - lo).tolist(),
                            "lower": lo.tolist(), "upper": hi.tolist()})


def inverse_iteration(pencil: TridiagonalPencil, lam: float, *, iterations: int = 6,
                      tol: float = 1e-12) -> np.ndarray:
    """Eigenvector for an eigenvalue estimate ``lam``, normalized in the ``M`` inner product."""
    n = pencil.size
    sigma = lam * (1.0 - 1e-10) if lam != 0 else -1e-10
    ab = np.zeros((3, n))
    ab[0, 1:] = pencil.e
    ab[1] = pencil.d - sigma * pencil.m
    ab[2, :-1] = pencil.e
    x = np.ones(n) / np.sqrt(np.sum(pencil.m))
    resid = np.inf
    for it in range(iterations):
        y = solve_banded((1, 1), ab, pencil.m * x)
        y /= np.sqrt(pencil.mass_form(y))
        if y[np.argmax(np.abs(y))] < 0:
            y = -y
        change = np.sqrt(pencil.mass_form(y - x))
        x = y
        if change < tol:
            return x
        resid = change
    if resid > 1e-6:
        raise ConvergenceError("inverse iteration stalled", {"iterations": iterations, "change": resid})
    return x
