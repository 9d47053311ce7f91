import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unbounded_diffusion.core import (
    DivergentIntegralError,
    OperatorParams,
    ParameterError,
    RadialFunction,
    RadialGrid,
    radial_quadrature,
)
from unbounded_diffusion.potential import (
    CutoffTemplate,
    ResolventKernel,
    WeightedEstimateProbe,
    apply_gradient_operator,
    apply_resolvent,
    estimate_failure_demo,
    failure_demo_parts,
    newtonian_weight_constant,
    newtonian_weight_potential,
    resolvent_norm_bound,
    standard_probe_set,
    verify_weighted_estimate,
    weighted_resolvent_constant,
)
from unbounded_diffusion.potential import _weight_sup
from unbounded_diffusion.profiles import PolyBump, SmoothBump

P34 = OperatorParams(3, 4.0)


def test_kernel_normalization_sign():
    assert ResolventKernel(P34).normalization == pytest.approx(-1.0 / (4 * math.pi))


def test_newtonian_weight_example():
    # N=5, beta=3: 1/((2-3)(5-3)) = -1/2, times |x|^(-1)
    assert newtonian_weight_constant(5, 3.0) == -0.5
    assert newtonian_weight_potential(5, 3.0, 2.0) == pytest.approx(-0.25, rel=1e-10)
    with pytest.raises(ParameterError):
        newtonian_weight_constant(3, 3.0)


def test_inverts_operator_on_compact_data():
    v = SmoothBump(1.5)
    grid = RadialGrid.uniform(3.0, 1600)
    r = grid.nodes
    f = RadialFunction(grid, -(1.0 + r ** 4) * v.laplacian(r, 3))
    u = apply_resolvent(f, P34)
    assert np.max(np.abs(u.values - v.value(r))) < 1e-5
    # derivative from the same integrals
    assert np.max(np.abs(u.derivative - v.d1(r))) < 1e-4


def test_resolvent_of_constant_at_origin_is_sup_norm():
    # T1(0) = pi/4 for N = 3, alpha = 4; the datum 1 carries decay exponent 0
    grid = RadialGrid.graded(50.0, 8000, 1e-4)
    one = RadialFunction(grid, np.ones(grid.size), decay_exponent=0.0)
    u = apply_resolvent(one, P34)
    assert u.values[0] == pytest.approx(math.pi / 4, rel=1e-6)
    assert np.all(np.diff(u.values) <= 0)


def test_tail_coefficient_matches_mass():
    grid = RadialGrid.uniform(6.0, 3000)
    f = RadialFunction.sample(grid, PolyBump(2.0, 3))
    u = apply_resolvent(f, P34)
    r = grid.nodes
    g = RadialFunction(grid, f.values / (1.0 + r ** 4))
    mass = radial_quadrature(g, 3)
    assert u.decay_exponent == 1.0
    assert u.tail_coefficient() == pytest.approx(mass, rel=1e-5)
    du = apply_gradient_operator(f, P34)
    assert du.decay_exponent == 2.0
    assert du.values[0] == 0.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.integers(3, 5), st.integers(3, 8))
def test_positivity(radius, power, N):
    grid = RadialGrid.uniform(4.0, 400)
    f = RadialFunction.sample(grid, PolyBump(radius, power))
    u = apply_resolvent(f, OperatorParams(N, 3.0))
    assert np.all(u.values > 0)
    assert np.all(np.diff(u.values) <= 1e-15)


def test_slow_tail_rejected():
    grid = RadialGrid.uniform(4.0, 100)
    f = RadialFunction(grid, np.ones(grid.size), decay_exponent=-3.0)
    with pytest.raises(DivergentIntegralError):
        apply_resolvent(f, P34)


def test_lp_bound_values():
    assert resolvent_norm_bound(OperatorParams(3, 4.0, 4.0)) == pytest.approx(8.0 / 3.0)
    assert resolvent_norm_bound(OperatorParams(3, 4.0, 6.0)) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        resolvent_norm_bound(P34)
    P = OperatorParams(3, 4.0, 6.0)
    assert weighted_resolvent_constant(P, 0.0) == pytest.approx(resolvent_norm_bound(P))


@pytest.mark.parametrize("alpha,beta", [(4.0, 0.0), (4.0, 0.5), (6.0, 1.0), (3.0, 1.0), (5.0, 2.5)])
def test_exact_weight_sup_against_grid(alpha, beta):
    v = np.geomspace(1e-3, 1e3, 400001)
    grid_sup = np.max(v ** (2 + beta) / (1 + v ** alpha))
    assert _weight_sup(alpha, beta, exact=True) == pytest.approx(grid_sup, rel=1e-8)
    if beta == 0.0:
        assert _weight_sup(alpha, beta, exact=False) == pytest.approx(grid_sup, rel=1e-8)


def test_weighted_estimate_probe():
    P = OperatorParams(5, 4.0, 3.0)
    probe = WeightedEstimateProbe(1.0, 0.5, standard_probe_set())
    rep = verify_weighted_estimate(probe, P)
    assert rep.satisfied
    assert max(rep.details["value_ratios"]) < rep.closed_form_value
    assert all(np.isfinite(rep.details["gradient_ratios"]))
    with pytest.raises(ParameterError):
        # beta must stay below N/p' - 2 = 4/3
        verify_weighted_estimate(WeightedEstimateProbe(1.5, 0.0, []), P)


def test_cutoff_template():
    phi = CutoffTemplate(10.0)
    r = np.linspace(0.0, 25.0, 50001)
    v, d1, d2 = phi(r)
    assert np.all(v[(r >= 2) & (r <= 10)] == 1.0)
    assert np.all(v[r >= 20] == 0.0) and np.all(v[r <= 1] == 0.0)
    outer = r > 10
    assert np.max(np.abs(d1[outer])) <= phi.d1_max / 10 + 1e-12
    assert np.max(np.abs(d2[outer])) <= phi.d2_max / 100 + 1e-12


def test_failure_demo_values():
    P = OperatorParams(6, 4.0, 3.0)
    got = [v for _, v in estimate_failure_demo(P, [4.0, 16.0, 64.0, 256.0])]
    assert got == pytest.approx([0.29689, 0.36037, 0.40707, 0.44497], abs=2e-5)
    top, bottom = failure_demo_parts(P, 16.0)
    assert (top / bottom) ** (1 / 3) == pytest.approx(got[1], rel=1e-12)
    with pytest.raises(ParameterError):
        estimate_failure_demo(OperatorParams(6, 3.0, 3.0), [4.0, 16.0])
    with pytest.raises(ParameterError):
        estimate_failure_demo(P, [16.0, 4.0])


def test_failure_demo_numerator_grows_like_log():
    # numerator^p gains |S^5| (N-2)^p log 4 per quadrupling of R at large R
    P = OperatorParams(6, 4.0, 3.0)
    a, _ = failure_demo_parts(P, 1024.0)
    b, _ = failure_demo_parts(P, 4096.0)
    area = 6 * math.pi ** 3 / math.gamma(4)
    assert (b - a) / (area * 4 ** 3 * math.log(4)) == pytest.approx(1.0, rel=2e-2)


def test_probe_set_shape():
    probes = standard_probe_set()
    assert len(probes) == 10
    assert all(p.grid is probes[0].grid for p in probes)
    assert any(np.min(p.values) < 0 for p in probes)
