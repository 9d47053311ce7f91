import math

import numpy as np
import pytest
from scipy import integrate, special
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from unbounded_diffusion.core import OperatorParams, ParameterError
from unbounded_diffusion.spectral import (
    SingularMassError,
    SpectralProblem,
    assemble_generalized_problem,
    channel_ordering_report,
    check_bounds,
    compute_spectrum,
    default_problem,
    default_radius,
    eigenvalue_bounds,
    extrapolate_in_radius,
    robin_ball_limit,
    sobolev_constant,
    weight_norm_factor,
)


def shooting_kappa(alpha, bracket, R=200.0):
    """N = 3: w = r u solves w'' + kappa w / (1 + r^alpha) = 0, w(0) = 0, w'(inf) = 0."""

    def slope(k):
        sol = solve_ivp(lambda r, y: [y[1], -k * y[0] / (1 + r ** alpha)], (0.0, R), [0.0, 1.0],
                        rtol=1e-12, atol=1e-14, method="DOP853")
        w, dw = sol.y[:, -1]
        # remove the tail of w' beyond R, where w is nearly constant
        return dw - k * w / ((alpha - 1) * R ** (alpha - 1))

    return brentq(slope, *bracket, xtol=1e-13)


@pytest.mark.parametrize("alpha,bracket", [(4.0, (1.0, 2.5)), (6.0, (1.0, 3.0)), (3.0, (0.8, 2.0))])
def test_lambda1_against_shooting(alpha, bracket):
    lam = extrapolate_in_radius(OperatorParams(3, alpha)).extrapolated_lambda1
    assert -lam == pytest.approx(shooting_kappa(alpha, bracket), rel=1e-6)


def test_bounds_N3_alpha4():
    b = eigenvalue_bounds(OperatorParams(3, 4.0))
    assert b.lp_norm_bound == pytest.approx(-0.5, rel=1e-14)
    assert b.sup_norm_bound == pytest.approx(-4.0 / math.pi, rel=1e-14)
    assert b.sharper_upper == "sup_norm_bound"
    assert b.sobolev_constant == pytest.approx((4 / math.sqrt(math.pi)) ** (2 / 3) / (3 * math.pi), rel=1e-14)
    # independent quadrature of the weight factor on [0, inf)
    val, _ = integrate.quad(lambda r: 4 * math.pi * r * r * (1 + r ** 4) ** -1.5, 0, np.inf, epsrel=1e-12)
    assert b.weight_factor == pytest.approx(val ** (2 / 3), rel=1e-10)
    assert b.sobolev_bound == pytest.approx(-1.0 / (b.sobolev_constant * b.weight_factor))
    assert b.sobolev_bound == pytest.approx(-1.79680, abs=1e-5)


def test_check_bounds_and_vector():
    P = OperatorParams(3, 4.0)
    res = extrapolate_in_radius(P)
    reps = check_bounds(res, eigenvalue_bounds(P))
    assert [r.bound_name for r in reps] == ["lambda1_le_lp_norm_bound", "lambda1_le_sup_norm_bound",
                                            "minus_lambda1_ge_sobolev_bound"]
    assert all(r.satisfied for r in reps)
    assert res.radius_extrapolated
    assert np.all(res.eigenvector > 0)
    assert res.free_nodes.size == res.eigenvector.size
    with pytest.raises(ParameterError):
        check_bounds(compute_spectrum(default_problem(P, ell=1, R=20.0, n=400)), eigenvalue_bounds(P))


@pytest.mark.parametrize("N,ratio", [(3, 2.0), (5, 8.0)])
def test_truncation_error_scales_like_R_power(N, ratio):
    P = OperatorParams(N, 4.0)
    R = default_radius(N)
    lam = [compute_spectrum(default_problem(P, 0, r, 2000), with_vector=False).extrapolated_lambda1
           for r in (R, 2 * R, 4 * R)]
    assert (lam[1] - lam[0]) / (lam[2] - lam[1]) == pytest.approx(ratio, rel=0.05)


def test_grid_richardson_improves():
    # same radius, so only the grid error differs from the fine reference
    P = OperatorParams(3, 4.0)
    ref = compute_spectrum(default_problem(P, 0, 200.0, 8000), with_vector=False).extrapolated_lambda1
    res = compute_spectrum(default_problem(P, 0, 200.0, 1000), with_vector=False)
    assert abs(res.extrapolated_lambda1 - ref) < 1e-3 * abs(res.lambda1 - ref)
    # second order: the coarse error is four times the fine one
    assert abs(res.coarse_lambda1 - res.lambda1) == pytest.approx(3 * abs(res.lambda1 - ref), rel=0.01)


def test_channels():
    P = OperatorParams(3, 4.0)
    rep = channel_ordering_report(P, R=100.0, n=1000)
    assert rep.satisfied
    lam = rep.details["lambda1_by_channel"]
    assert lam[0] > lam[1] > lam[2]
    prob = default_problem(P, ell=2, R=10.0, n=100, k=3)
    assert prob.channel_potential == 2 * 3
    res = compute_spectrum(prob, with_vector=False)
    assert res.eigenvalues[0] > res.eigenvalues[1] > res.eigenvalues[2]


def test_pencil_drops_origin_for_higher_channels():
    P = OperatorParams(4, 3.0)
    g = default_problem(P, 0, 10.0, 50).grid
    assert assemble_generalized_problem(SpectralProblem(P, 0, g)).size == g.size - 1
    assert assemble_generalized_problem(SpectralProblem(P, 1, g)).size == g.size - 2


def test_robin_limits():
    assert robin_ball_limit(3) == pytest.approx(-math.pi ** 2 / 4, rel=1e-12)
    assert robin_ball_limit(5) == pytest.approx(-math.pi ** 2, rel=1e-12)
    assert robin_ball_limit(4) == pytest.approx(-special.jn_zeros(0, 1)[0] ** 2, rel=1e-12)


def test_large_alpha_approaches_robin_limit():
    res = extrapolate_in_radius(OperatorParams(3, 200.0), radii=(12.0, 24.0))
    assert res.extrapolated_lambda1 == pytest.approx(robin_ball_limit(3), rel=0.01)


def test_large_alpha_mass_underflow():
    with pytest.raises(SingularMassError):
        compute_spectrum(default_problem(OperatorParams(3, 200.0), 0, 40.0, 500))


def test_sobolev_constant_values():
    # N = 4: (Gamma(4)/Gamma(2))^(1/2) / (8 pi) = sqrt(6) / (8 pi)
    assert sobolev_constant(4) == pytest.approx(math.sqrt(6) / (8 * math.pi), rel=1e-14)
    assert weight_norm_factor(OperatorParams(5, 6.0)) > 0


def test_problem_validation():
    P = OperatorParams(3, 4.0)
    g = default_problem(P).grid
    with pytest.raises(ParameterError):
        SpectralProblem(P, -1, g)
    with pytest.raises(ParameterError):
        SpectralProblem(P, 0, g, k=0)
    assert default_radius(3) == 1e4 and default_radius(8) == 10.0
