import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from blowup_lab.grid import RadialGrid
from blowup_lab.model import (NoCompatibleProfileError, ProblemSpec, RadialProfile,
                              build_compatible_initial_data, check_small_lambda_condition,
                              validate_compatibility, validate_lower_bound_condition)

# Plain undamped iteration of F = exp(-2 + F/2), substituted back to round-off.
F_STAR = 0.14555166531207067


def spec_with(u0, v0, lam1=0.01, lam2=0.01, n=1):
    return ProblemSpec(n, u0.R, lam1, lam2, u0, v0)


def test_fixed_point_value():
    u0, v0 = build_compatible_initial_data(1, 1.0, -2.0, -2.0)
    assert u0.F == pytest.approx(F_STAR, abs=1e-11)
    assert abs(u0.F - math.exp(-2.0 + u0.F / 2.0)) <= 1e-12


@pytest.mark.parametrize("b", [-3.0, -1.0, -0.5])
def test_flux_identity_exact(b):
    u0, v0 = build_compatible_initial_data(1, 1.0, b, b)
    g = RadialGrid(1.0, 32)
    assert u0.boundary_flux(g) == pytest.approx(math.exp(v0.sample(g)[-1]), abs=1e-12)
    assert v0.boundary_flux(g) == pytest.approx(math.exp(u0.sample(g)[-1]), abs=1e-12)


def test_symmetric_bases_give_identical_profiles():
    u0, v0 = build_compatible_initial_data(2, 1.5, -1.2, -1.2)
    assert u0 == v0


def test_no_fixed_point_raises():
    # tangency of F = exp(b + F/2) at b = log 2 - 1; above it no solution exists
    with pytest.raises(NoCompatibleProfileError):
        build_compatible_initial_data(1, 1.0, 0.0, 0.0)


@pytest.mark.parametrize("kwargs", [{"tol": 0.0}, {"max_iter": 0}])
def test_builder_preconditions(kwargs):
    with pytest.raises(ValueError):
        build_compatible_initial_data(1, 1.0, -2.0, -2.0, **kwargs)


@given(bu=st.floats(-5, 0), bv=st.floats(-5, 0), n=st.integers(1, 4), R=st.floats(0.25, 2.0))
@settings(max_examples=60, deadline=None)
def test_built_data_pass_all_checks(bu, bv, n, R):
    try:
        u0, v0 = build_compatible_initial_data(n, R, bu, bv)
    except NoCompatibleProfileError:
        assume(False)
    spec = spec_with(u0, v0, n=n)
    g = RadialGrid(R, 40)
    assert validate_compatibility(u0, v0, spec, g).satisfied
    assert validate_lower_bound_condition(u0, v0, spec, g).satisfied


def test_constant_data_fail_flux():
    c = RadialProfile.constant(0.3, 1.0)
    rep = validate_compatibility(c, c, spec_with(c, c), RadialGrid(1.0, 16))
    assert not rep.entry("flux-u").satisfied
    assert rep.entry("flux-u").margin == pytest.approx(-math.exp(0.3))
    assert not rep.satisfied


def test_negative_slope_fails_monotonicity():
    u0 = RadialProfile.quadratic(0.0, -1.0, 1.0)
    v0 = RadialProfile.quadratic(0.0, 1.0, 1.0)
    rep = validate_compatibility(u0, v0, spec_with(u0, v0), RadialGrid(1.0, 16))
    assert not rep.entry("monotone-u").satisfied
    assert rep.entry("monotone-v").satisfied


def test_lambda_variant_reported_not_critical():
    u0, v0 = build_compatible_initial_data(1, 1.0, -2.0, -2.0)
    rep = validate_compatibility(u0, v0, spec_with(u0, v0), RadialGrid(1.0, 16))
    assert not rep.entry("laplacian-u-lambda").critical
    assert rep.entry("laplacian-u").critical
    assert rep.entry("laplacian-u-lambda").satisfied


def test_lower_bound_condition_on_flat_data():
    z = RadialProfile.constant(0.0, 1.0)
    g = RadialGrid(1.0, 16)
    rep = validate_lower_bound_condition(z, z, spec_with(z, z), g)
    assert not rep.satisfied
    # min of 0 - r/R over the grid is at r = R
    assert rep.entry("lower-rate-u").margin == pytest.approx(-1.0)


def test_lower_bound_condition_flags_unequal_lambdas():
    u0, v0 = build_compatible_initial_data(1, 1.0, -2.0, -2.0)
    rep = validate_lower_bound_condition(u0, v0, spec_with(u0, v0, 0.01, 0.02), RadialGrid(1.0, 16))
    assert rep.entry("lower-rate-u").satisfied
    assert not rep.entry("equal-lambdas").satisfied


def test_small_lambda_condition_arithmetic():
    u0 = RadialProfile.constant(2.0, 1.0)
    spec = spec_with(u0, u0, lam1=0.011, lam2=0.005)
    ff = check_small_lambda_condition(spec, C_est=10.0, T_est=1.0)
    # min{1/10, (8/9) e^{-2} = 0.1202980...} = 0.1, lhs = 9 * max(λ1, λ2)
    assert ff.rhs == pytest.approx(0.1, rel=1e-15)
    assert ff.lhs == pytest.approx(9 * 0.011)
    assert ff.satisfied
    assert ff.lambda_max_admissible == pytest.approx(0.1 / 9)
    ff = check_small_lambda_condition(spec_with(u0, u0, 0.0112, 0.0112), 10.0, 1.0)
    assert not ff.satisfied


def test_small_lambda_condition_limits():
    u0 = RadialProfile.constant(2.0, 1.0)
    assert check_small_lambda_condition(spec_with(u0, u0, 1e-12, 1e-12), 10.0, 1.0).satisfied
    big = RadialProfile.constant(60.0, 1.0)
    assert not check_small_lambda_condition(spec_with(big, big, 1e-12, 1e-12), 10.0, 1.0).satisfied


@pytest.mark.parametrize("C,T", [(0.0, 1.0), (1.0, -1.0)])
def test_small_lambda_condition_rejects_nonpositive(C, T):
    u0 = RadialProfile.constant(0.0, 1.0)
    with pytest.raises(ValueError):
        check_small_lambda_condition(spec_with(u0, u0), C, T)


@given(C=st.floats(0.01, 100), T=st.floats(0.01, 100), nu=st.floats(0, 10), nv=st.floats(0, 10),
       factor=st.floats(1.0, 10.0), which=st.integers(0, 3))
@settings(max_examples=100, deadline=None)
def test_lambda_max_admissible_monotone(C, T, nu, nv, factor, which):
    def lam_max(args):
        C, T, nu, nv = args
        u0, v0 = RadialProfile.constant(nu, 1.0), RadialProfile.constant(nv, 1.0)
        return check_small_lambda_condition(spec_with(u0, v0), C, T).lambda_max_admissible

    base = [C, T, nu, nv]
    bumped = list(base)
    bumped[which] = bumped[which] * factor + (0.1 if which >= 2 else 0.0)
    assert lam_max(bumped) <= lam_max(base) * (1 + 1e-12)


def test_lambda_max_times_factor_equals_rhs():
    u0, v0 = build_compatible_initial_data(3, 0.7, -1.0, -2.0)
    ff = check_small_lambda_condition(spec_with(u0, v0, n=3), 2.0, 0.5)
    assert ff.lambda_max_admissible * (4 * 0.7**2 * 4 + 1) == pytest.approx(ff.rhs, rel=1e-14)


def test_tabulated_margins_converge_second_order():
    # smooth non-quadratic profile; margins from discrete derivatives
    def margins(J):
        g = RadialGrid(1.0, J)
        p = RadialProfile.tabulated(g.r, 0.1 * g.r**4 + 0.2 * g.r**2)
        rep = validate_compatibility(p, p, spec_with(p, p), g)
        return np.array([rep.entry("flux-u").margin, rep.entry("monotone-u").margin])

    m1, m2, m4 = margins(32), margins(64), margins(128)
    d1, d2 = np.abs(m1 - m2), np.abs(m2 - m4)
    assert d1[0] / d2[0] == pytest.approx(4.0, rel=0.1)
    assert np.all(d2 <= d1)


def test_problem_spec_invariants():
    p = RadialProfile.constant(0.0, 1.0)
    with pytest.raises(ValueError):
        ProblemSpec(0, 1.0, 1.0, 1.0, p, p)
    with pytest.raises(ValueError):
        ProblemSpec(1, 1.0, -1.0, 1.0, p, p)
    with pytest.raises(ValueError):
        ProblemSpec(1, 2.0, 1.0, 1.0, p, p)


def test_sup_norm():
    assert RadialProfile.quadratic(-2.0, 0.3, 1.0).sup_norm() == 2.0
    assert RadialProfile.quadratic(1.0, 2.0, 1.0).sup_norm() == 2.0
    assert RadialProfile.tabulated([0, 0.5, 1.0], [0.0, -3.0, 1.0]).sup_norm() == 3.0
