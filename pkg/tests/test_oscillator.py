import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from logspring import (SpringConfig, extremum_times, mass_consistency_residual,
                       universal_residual)
from logspring.errors import DomainError, PreconditionError

POSITIVE = st.floats(min_value=0.01, max_value=100.0, allow_nan=False,
                     allow_infinity=False)
TIME_FACTOR = st.floats(min_value=0.01, max_value=1000.0, allow_nan=False,
                        allow_infinity=False)


def make(theta=2.0, t0=1.0, x0=1.0, x1=0.0, m0=1.0):
    return SpringConfig(m0=m0, t0=t0, k0=m0 * (theta / t0) ** 2, x0=x0, x1=x1)


class TestConstructionAndTheta:
    def test_theta_examples(self):
        assert SpringConfig(m0=1, t0=1, k0=4).theta == 2.0
        assert SpringConfig(m0=1, t0=1, k0=1).theta == 1.0
        assert SpringConfig(m0=4, t0=2, k0=9).theta == 3.0

    @pytest.mark.parametrize("bad", [dict(m0=0), dict(m0=-1), dict(t0=0),
                                     dict(k0=-2), dict(t0=math.inf)])
    def test_rejects_nonpositive_parameters(self, bad):
        params = dict(m0=1.0, t0=1.0, k0=4.0)
        params.update(bad)
        with pytest.raises(DomainError):
            SpringConfig(**params)


class TestPointwiseFormulas:
    def test_mass_examples(self):
        assert SpringConfig(m0=1, t0=1, k0=1).mass_at(1.0) == 1.0
        assert SpringConfig(m0=1, t0=1, k0=1).mass_at(2.0) == 2.0
        assert SpringConfig(m0=3, t0=2, k0=1).mass_at(5.0) == 7.5

    def test_stiffness_examples(self):
        assert SpringConfig(m0=1, t0=1, k0=4).stiffness_at(1.0) == 4.0
        assert SpringConfig(m0=1, t0=1, k0=4).stiffness_at(2.0) == 2.0
        assert SpringConfig(m0=1, t0=3, k0=6).stiffness_at(9.0) == 2.0

    def test_nonpositive_time_rejected(self):
        cfg = make()
        for method in (cfg.mass_at, cfg.stiffness_at, cfg.position, cfg.velocity,
                       cfg.energy, cfg.omega_at):
            with pytest.raises(DomainError):
                method(0.0)
            with pytest.raises(DomainError):
                method(-1.0)

    def test_position_examples(self):
        assert make(x0=1.0, x1=0.5).position(1.0) == 0.5
        assert make(theta=2.0, x0=1.0).position(math.exp(math.pi / 4)) == pytest.approx(1.0, abs=1e-15)
        assert abs(make(theta=2.0, x0=1.0).position(math.exp(math.pi / 2))) < 1e-12

    def test_velocity_examples(self):
        assert make(theta=2.0, x0=1.0).velocity(1.0) == 2.0
        assert abs(make(theta=2.0, x0=1.0).velocity(math.exp(math.pi / 4))) < 1e-12
        assert make(theta=1.0, x0=0.0, x1=1.0).velocity(1.0) == 0.0

    def test_energy_examples(self):
        cfg = make(theta=2.0, x0=1.0)  # k0 = 4
        assert cfg.energy(1.0) == pytest.approx(2.0, rel=1e-14)
        assert cfg.energy(2.0) == pytest.approx(1.0, rel=1e-14)
        assert make(x0=0.0, x1=0.0).energy(17.3) == 0.0

    def test_state_snapshot_consistency(self):
        cfg = make(theta=3.0, x0=0.7, x1=-0.2)
        s = cfg.state_at(4.2)
        assert s.m * s.k == pytest.approx(cfg.m0 * cfg.k0, rel=1e-14)
        assert s.omega == pytest.approx(cfg.theta / 4.2, rel=1e-14)
        assert s.energy == pytest.approx(0.5 * s.k * s.x ** 2 + 0.5 * s.m * s.v ** 2,
                                         rel=1e-14)


class TestUniversalRelation:
    def test_residual_small_at_sampled_times(self):
        cfg = make(theta=2.0, x0=1.3)
        for mult in (1.0, 3.7, 41.0):
            assert abs(universal_residual(cfg, mult * cfg.t0)) < 1e-12

    def test_turning_point_and_crossing(self):
        cfg = make(theta=2.0, x0=1.0)
        turning = cfg.t0 * math.exp(math.pi / 4)   # |x| = x0
        crossing = cfg.t0 * math.exp(math.pi / 2)  # x = 0
        assert abs(universal_residual(cfg, turning)) < 1e-12
        assert abs(universal_residual(cfg, crossing)) < 1e-12

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            universal_residual(make(x0=1.0, x1=0.5), 2.0)
        with pytest.raises(PreconditionError):
            universal_residual(make(x0=0.0, x1=0.0), 2.0)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(theta=st.floats(0.2, 20.0), mult=TIME_FACTOR, x0=st.floats(0.1, 5.0))
    def test_residual_property(self, theta, mult, x0):
        cfg = make(theta=theta, x0=x0)
        assert abs(universal_residual(cfg, mult * cfg.t0)) < 1e-12


class TestMassConsistency:
    def test_zero_at_reference_time(self):
        assert mass_consistency_residual(make(theta=2.0), 1.0) == 0.0

    def test_reconstruction_examples(self):
        assert abs(mass_consistency_residual(make(theta=2.0), math.e)) < 1e-8
        assert abs(mass_consistency_residual(make(theta=1.0), 10.0)) < 1e-8

    def test_many_endpoints_and_angles(self):
        for theta in (1.0, 2.0, 5.0):
            cfg = make(theta=theta)
            for t in (1.3, 2.0, math.e, 5.0, 10.0):
                assert abs(mass_consistency_residual(cfg, t)) < 1e-8

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            mass_consistency_residual(make(x1=0.5), 2.0)
        with pytest.raises(DomainError):
            mass_consistency_residual(make(), 0.5)


class TestExtremumTimes:
    def test_position_extremum_against_root_finding(self):
        cfg = make(theta=math.pi, x0=1.0)
        ext = extremum_times(cfg, 0, 0)
        expected = cfg.t0 * math.exp(0.5)
        assert ext.position[0] == pytest.approx(expected, rel=1e-14)
        # independent check: root of the velocity near the predicted time
        root = brentq(cfg.velocity, 0.8 * expected, 1.2 * expected, rtol=1e-15)
        assert ext.position[0] == pytest.approx(root, rel=1e-12)

    def test_velocity_extremum_against_root_finding(self):
        cfg = make(theta=2.0, x0=1.0)
        ext = extremum_times(cfg, 1, 3)
        for t_n in ext.velocity:
            root = brentq(cfg.acceleration, 0.99 * t_n, 1.01 * t_n, rtol=1e-15)
            assert t_n == pytest.approx(root, rel=1e-12)

    def test_geometric_spacing(self):
        cfg = make(theta=2.7, x0=1.0)
        ext = extremum_times(cfg, 0, 5)
        for times in (ext.position, ext.velocity):
            assert np.all(np.diff(times) > 0)
            ratios = times[1:] / times[:-1]
            assert np.allclose(ratios, math.exp(math.pi / cfg.theta), rtol=1e-13)

    def test_large_theta_velocity_extrema_near_zero_crossings(self):
        theta = 400.0
        cfg = make(theta=theta, x0=1.0)
        ext = extremum_times(cfg, 1, 4)
        zero_crossings = cfg.t0 * np.exp(np.arange(1, 5) * math.pi / theta)
        assert np.allclose(ext.velocity, zero_crossings, rtol=2.0 / theta ** 2)

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            extremum_times(make(x1=1.0), 0, 3)
        with pytest.raises(PreconditionError):
            extremum_times(make(), 3, 0)


class TestInvariants:
    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(m0=POSITIVE, t0=POSITIVE, k0=POSITIVE, mult=TIME_FACTOR)
    def test_stiffness_mass_product(self, m0, t0, k0, mult):
        cfg = SpringConfig(m0=m0, t0=t0, k0=k0)
        t = mult * t0
        product = cfg.stiffness_at(t) * cfg.mass_at(t)
        assert abs(product - k0 * m0) <= 4.0 * np.spacing(k0 * m0)

    def test_ode_residual_analytic(self):
        cfg = make(theta=2.0, x0=1.0, x1=0.5)
        t = np.geomspace(0.1, 500.0, 777)
        res = t * t * cfg.acceleration(t) + t * cfg.velocity(t) + cfg.theta ** 2 * cfg.position(t)
        assert np.max(np.abs(res)) < 1e-12 * cfg.theta ** 2 * abs(cfg.x0)

    def test_ode_residual_finite_difference(self):
        # independent derivative oracle: central differences with h = 1e-5*t,
        # evaluated in 50-digit arithmetic so the difference quotient itself
        # does not drown in rounding
        theta, t0, x0 = 2.0, 1.0, 1.0
        with mpmath.workdps(50):
            for t in (mpmath.mpf("0.7"), mpmath.mpf("3.1"), mpmath.mpf("42.0")):
                h = t * mpmath.mpf("1e-5")

                def x(tt):
                    return x0 * mpmath.sin(theta * mpmath.log(tt / t0))

                d1 = (x(t + h) - x(t - h)) / (2 * h)
                d2 = (x(t + h) - 2 * x(t) + x(t - h)) / (h * h)
                res = t * t * d2 + t * d1 + theta ** 2 * x(t)
                assert abs(res) < 1e-9 * theta ** 2 * abs(x0)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(theta=st.floats(0.3, 15.0), x0=st.floats(-3.0, 3.0),
           x1=st.floats(-3.0, 3.0), mult=TIME_FACTOR)
    def test_energy_decays_as_inverse_time(self, theta, x0, x1, mult):
        cfg = make(theta=theta, x0=x0, x1=x1)
        t = mult * cfg.t0
        lhs = cfg.energy(t) * t
        rhs = cfg.energy(cfg.t0) * cfg.t0
        assert abs(lhs - rhs) <= 1e-12 * max(rhs, 1e-30) + 1e-30

    def test_energy_law_sampled(self):
        cfg = make(theta=2.0, x0=1.0)
        t = np.geomspace(1.0, 100.0, 1000)
        ratio = cfg.energy(t) * t / (cfg.energy(1.0) * 1.0)
        assert np.max(np.abs(ratio - 1.0)) < 1e-12

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(c=st.floats(0.05, 50.0), mult=TIME_FACTOR)
    def test_scale_covariance(self, c, mult):
        base = make(theta=2.0, t0=1.0, x0=1.0, x1=0.4)
        scaled = SpringConfig(m0=base.m0, t0=c * base.t0, k0=base.k0 / (c * c),
                              x0=base.x0, x1=base.x1)
        assert scaled.theta == pytest.approx(base.theta, rel=1e-14)
        t = mult * base.t0
        assert scaled.position(c * t) == pytest.approx(base.position(t), abs=2e-13)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(theta=st.floats(0.3, 15.0), mult=TIME_FACTOR)
    def test_log_periodicity(self, theta, mult):
        cfg = make(theta=theta, x0=0.8, x1=-0.3)
        t = mult * cfg.t0
        shifted = t * math.exp(2.0 * math.pi / theta)
        scale = abs(cfg.x0) + abs(cfg.x1)
        assert abs(cfg.position(shifted) - cfg.position(t)) < 1e-12 * scale
