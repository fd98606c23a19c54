import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixed_platoon.models import (
    CaccParams,
    OvmParams,
    cacc_accel,
    desired_velocity,
    desired_velocity_array,
    equilibrium_from_velocity,
    linearize,
    ovm_accel,
)


def fd(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


ovm_params = st.builds(
    OvmParams,
    alpha=st.floats(0.05, 2.0),
    beta=st.floats(0.05, 2.0),
    s_min=st.floats(0.0, 5.0),
    s_max=st.floats(10.0, 60.0),
    v_max=st.floats(5.0, 40.0),
)


class TestDesiredVelocity:
    @pytest.mark.parametrize("s, expected", [(2.0, 0.0), (0.0, 0.0), (32.0, 30.0), (50.0, 30.0), (17.0, 15.0)])
    def test_table1_values(self, ovm, s, expected):
        assert desired_velocity(ovm, s) == pytest.approx(expected, abs=1e-12)

    def test_negative_spacing_rejected(self, ovm):
        with pytest.raises(ValueError):
            desired_velocity(ovm, -0.1)

    def test_monotone_on_dense_grid(self, ovm):
        grid = np.linspace(0, 2 * ovm.s_max, 20001)
        v = np.array([desired_velocity(ovm, s) for s in grid])
        assert np.all(np.diff(v) >= 0)
        np.testing.assert_allclose(desired_velocity_array(ovm, grid), v, atol=1e-12)


class TestOvmAccel:
    @pytest.mark.parametrize(
        "s, s_dot, v, expected",
        [(17.0, 0.0, 15.0, 0.0), (17.0, 1.0, 15.0, 0.9), (2.0, 0.0, 10.0, -6.0)],
    )
    def test_table1_values(self, ovm, s, s_dot, v, expected):
        assert ovm_accel(ovm, s, s_dot, v) == pytest.approx(expected, abs=1e-12)


class TestEquilibrium:
    def test_table1(self, ovm):
        eq = equilibrium_from_velocity(ovm, 15.0)
        assert eq.s_star == pytest.approx(17.0, abs=1e-12)
        assert eq.v_prime == pytest.approx(math.pi / 2, abs=1e-12)
        assert abs(desired_velocity(ovm, eq.s_star) - 15.0) < 1e-9

    def test_v_prime_matches_finite_difference(self, ovm, eq):
        slope = fd(lambda s: desired_velocity(ovm, s), eq.s_star)
        assert slope == pytest.approx(eq.v_prime, rel=1e-8)

    def test_lower_limit(self, ovm):
        assert equilibrium_from_velocity(ovm, 1e-10).s_star == pytest.approx(ovm.s_min, abs=1e-3)

    @pytest.mark.parametrize("v", [0.0, -1.0, 30.0, 31.0])
    def test_no_interior_equilibrium(self, ovm, v):
        with pytest.raises(ValueError):
            equilibrium_from_velocity(ovm, v)

    @given(p=ovm_params, frac=st.floats(0.01, 0.99))
    def test_equilibrium_is_fixed_point(self, p, frac):
        eq = equilibrium_from_velocity(p, frac * p.v_max)
        assert p.s_min < eq.s_star < p.s_max
        assert eq.v_prime > 0
        assert abs(ovm_accel(p, eq.s_star, 0.0, eq.v_star)) < 1e-9


class TestLinearize:
    def test_table1(self, coeffs):
        assert coeffs.a1 == pytest.approx(0.6 * math.pi / 2, rel=1e-12)
        assert coeffs.a1 == pytest.approx(0.9425, abs=1e-4)
        assert (coeffs.a2, coeffs.a3) == (1.5, 0.9)

    @settings(max_examples=50)
    @given(p=ovm_params, frac=st.floats(0.05, 0.95))
    def test_matches_finite_differences(self, p, frac):
        eq = equilibrium_from_velocity(p, frac * p.v_max)
        c = linearize(p, eq)
        d_s = fd(lambda s: ovm_accel(p, s, 0.0, eq.v_star), eq.s_star)
        d_sdot = fd(lambda sd: ovm_accel(p, eq.s_star, sd, eq.v_star), 0.0)
        d_v = fd(lambda v: ovm_accel(p, eq.s_star, 0.0, v), eq.v_star)
        assert c.a1 == pytest.approx(d_s, rel=1e-6)
        assert c.a3 == pytest.approx(d_sdot, rel=1e-6)
        # a2 is the sensitivity to the own velocity with the predecessor held fixed
        assert c.a2 == pytest.approx(d_sdot - d_v, rel=1e-6)
        assert c.a3 == p.beta


class TestCacc:
    @pytest.mark.parametrize(
        "s, v, v_prev, expected",
        [(17.0, 15.0, 15.0, 0.0), (18.0, 15.0, 15.0, 0.45 / 0.35), (17.0, 15.0, 16.0, 0.25 / 0.35)],
    )
    def test_table1_values(self, cacc, s, v, v_prev, expected):
        assert cacc_accel(cacc, s, v, v_prev) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @given(v=st.floats(0.0, 40.0))
    def test_constant_headway_equilibrium(self, v):
        p = CaccParams()
        assert abs(cacc_accel(p, p.s_0 + p.t_h * v, v, v)) < 1e-12

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            CaccParams(k_p=0.0)
