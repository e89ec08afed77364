import math

import numpy as np
import pytest

from errors import ContractViolationError
from odecheck import (
    U_NONZERO,
    U_ZERO,
    ZERO,
    build_solutions,
    derivative_identities,
    independence_check,
    null_f_constancy,
    ode_residual,
    profile_for_chart,
    riccati_residual,
    u_constancy,
)
from products import null_profile

GRID = np.linspace(-0.45, 0.45, 7)
NULL_GRID = np.linspace(0.02, 0.23, 5)


# ==========================================================================
# SOLUTIONS OF THE PROFILE ODE
# ==========================================================================

class TestSolutionBundle:
    @pytest.mark.parametrize("member", ["g1", "g2", "g1tilde"])
    def test_solutions_solve_the_ode(self, varying_profile, member):
        """g'' + i l1 g' + (i l1' + c) g vanishes along the interval."""
        bundle = build_solutions(varying_profile)
        g = getattr(bundle, member)
        assert max(ode_residual(g, varying_profile, t) for t in GRID) < 1e-8

    def test_zero_function(self, varying_profile):
        assert ode_residual(ZERO, varying_profile, 0.1) == 0.0
        with pytest.raises(ContractViolationError):
            ZERO.derivative(0.0, order=3)

    def test_derivative_identities(self, varying_profile):
        """f1' = c g1, f2' = c g2, f1tilde' = c g1tilde."""
        bundle = build_solutions(varying_profile)
        for t in GRID:
            assert max(derivative_identities(bundle, t).values()) < 1e-8

    def test_initial_values(self, varying_profile):
        """g2(0) = 1 and g1(0) = k(0) - i l2(0)."""
        bundle = build_solutions(varying_profile)
        assert bundle.g2(0.0) == pytest.approx(1.0)
        assert bundle.g1(0.0) == pytest.approx(complex(0.0, -0.3))


# ==========================================================================
# CONSERVED QUANTITY AND RICCATI
# ==========================================================================

class TestProfileChecks:
    def test_riccati(self, varying_profile):
        assert max(riccati_residual(varying_profile, t) for t in GRID) < 1e-8

    def test_u_constancy(self, varying_profile):
        mean, deviation = u_constancy(varying_profile, GRID)
        assert mean == pytest.approx(1.09, rel=1e-7)
        assert deviation / mean < 1e-7


# ==========================================================================
# INDEPENDENCE
# ==========================================================================

class TestIndependence:
    def test_nonzero_u(self, varying_profile):
        """|f'| = |u| e^{-2 int k} and never vanishes."""
        bundle = build_solutions(varying_profile)
        for t in GRID:
            result = independence_check(bundle, varying_profile, t)
            assert result.case == U_NONZERO
            assert result.passed
            assert abs(result.fprime) > 0.1

    def test_null_case(self):
        """With u = 0 the ratio f is constant and ftilde takes over."""
        prof = null_profile()
        bundle = build_solutions(prof)
        for t in NULL_GRID:
            result = independence_check(bundle, prof, t)
            assert result.case == U_ZERO
            assert result.passed
            assert abs(result.fprime) < 1e-9
        assert null_f_constancy(bundle, NULL_GRID) < 1e-8

    def test_result_dict(self, varying_profile):
        result = independence_check(build_solutions(varying_profile), varying_profile, 0.0)
        record = result.to_dict()
        assert record["case"] == U_NONZERO and record["pass"] is True
        assert record["expected_modulus"] == pytest.approx(1.09)


# ==========================================================================
# PROFILES BEHIND CHARTS
# ==========================================================================

class TestProfileForChart:
    def test_calabi_constant_profile(self, calabi_cp2):
        """A Calabi chart yields its constant profile with k = 0."""
        prof = profile_for_chart(calabi_cp2)
        assert prof.k_0 == 0.0
        assert prof.u == pytest.approx(1.5)

    def test_ch_calabi(self, calabi_ch_case1):
        prof = profile_for_chart(calabi_ch_case1)
        assert prof.c == -1.0
        assert prof.u == pytest.approx(1.0)

    def test_stored_profiles(self, warped_profile_chart, varying_profile, null_chart):
        assert profile_for_chart(warped_profile_chart) is varying_profile
        assert profile_for_chart(null_chart) is null_chart.prof

    def test_two_blocks_have_no_profile(self, minimal_two):
        assert profile_for_chart(minimal_two) is None
