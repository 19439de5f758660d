import math
from dataclasses import dataclass

import numpy as np
import pytest

from logspring import (EconConfig, SpringConfig, construct_coefficients,
                       initial_from_oscillation, integrate_econ, to_mechanical,
                       verify_price_ode)
from logspring.errors import DomainError, MappingError, PreconditionError, WindowError


def canonical(theta=2.0, **kw):
    params = dict(gamma=1.0, lam=1.0, ell=1.0, ell0=1.0, p_star=10.0, d_star=5.0)
    params.update(kw)
    return EconConfig.log_periodic(theta=theta, **params)


class TestConstructCoefficients:
    def test_reference_values(self):
        d_o, q_o, window = construct_coefficients(1.0, 1.0, 1.0, 2.0)
        assert q_o(1.0) - d_o(1.0) == 5.0
        assert d_o(1.0) == 4.0
        assert q_o(1.0) == 9.0
        assert window == (5.0, 10.0)

    def test_window_endpoints_are_exact_roots(self):
        d_o, q_o, window = construct_coefficients(1.0, 1.0, 1.0, 2.0)
        assert d_o(window[0]) == 0.0
        assert q_o(window[1]) == 0.0

    def test_damping_identity_at_random_points(self):
        gamma, lam, ell, theta = 1.3, 0.7, 2.1, 3.4
        d_o, q_o, window = construct_coefficients(gamma, lam, ell, theta)
        rng = np.random.default_rng(5)
        for t in rng.uniform(window[0] * 1.0001, window[1] * 0.9999, size=100):
            beta = q_o(t) - d_o(t)
            damping = gamma * beta - lam * ell * d_o(t)
            assert damping * t == pytest.approx(1.0, rel=1e-12)

    def test_both_slope_identities(self):
        cfg = canonical(theta=2.0)
        rng = np.random.default_rng(6)
        le = cfg.lam * cfg.ell
        lo, hi = cfg.window
        for t in rng.uniform(lo * 1.0001, hi * 0.9999, size=100):
            beta = cfg.beta_o(t)
            assert le * cfg.d_o(t) == pytest.approx(cfg.gamma * beta - 1.0 / t, rel=1e-12)
            assert le * cfg.q_o(t) == pytest.approx(
                (cfg.gamma + le) * beta - 1.0 / t, rel=1e-12)

    def test_frequency_identity_by_derivation(self):
        # substituting the family into the eliminated second-order equation
        # must reproduce the (theta/t)^2 frequency coefficient
        gamma, lam, ell, theta = 2.0, 0.5, 1.5, 4.0
        d_o, q_o, _ = construct_coefficients(gamma, lam, ell, theta)
        for t in (3.0, 11.0, 60.0):
            beta = q_o(t) - d_o(t)
            freq = gamma * q_o.rate(t) - (gamma + lam * ell) * d_o.rate(t) + lam * beta
            assert freq == pytest.approx((theta / t) ** 2, rel=1e-12)

    def test_sign_conditions_inside_window_only(self):
        cfg = canonical()
        lo, hi = cfg.window
        for t in np.linspace(lo * 1.001, hi * 0.999, 100):
            assert cfg.d_o(t) < 0.0
            assert cfg.q_o(t) > 0.0
            assert cfg.beta_o(t) > 0.0
        assert cfg.d_o(lo * 0.9) > 0.0
        assert cfg.q_o(hi * 1.1) < 0.0
        for t in np.geomspace(0.01, 1e4, 50):
            assert cfg.beta_o(t) > 0.0

    def test_lambda_zero_rejected(self):
        with pytest.raises(DomainError):
            construct_coefficients(1.0, 0.0, 1.0, 2.0)

    def test_nonpositive_parameters_rejected(self):
        with pytest.raises(DomainError):
            construct_coefficients(-1.0, 1.0, 1.0, 2.0)
        with pytest.raises(DomainError):
            construct_coefficients(1.0, 1.0, 1.0, 0.0)


class TestDemandSupply:
    def test_equilibrium_values(self):
        cfg = canonical()
        assert cfg.demand(cfg.p_star, 7.0) == cfg.d_star
        assert cfg.supply(cfg.p_star, 7.0) == cfg.d_star
        assert cfg.stock_rate(cfg.p_star, 7.0) == 0.0

    def test_linear_response(self):
        cfg = EconConfig(gamma=1.0, lam=1.0, ell0=0.0, ell=1.0, p_star=0.0,
                         d_star=10.0, d_o=lambda t: -2.0, q_o=lambda t: 3.0)
        assert cfg.demand(1.0, 5.0) == 8.0
        assert cfg.supply(1.0, 5.0) == 13.0
        assert cfg.stock_rate(2.0, 5.0) == 5.0 * 2.0

    def test_falling_price_raises_demand_inside_window(self):
        cfg = canonical()
        assert cfg.demand(cfg.p_star - 1.0, 7.0) > cfg.d_star

    def test_window_enforced(self):
        cfg = canonical()
        for t in (4.9, 10.1, 5.0, 10.0):
            with pytest.raises(WindowError):
                cfg.demand(1.0, t)

    def test_stock_rate_proportional_to_deviation(self):
        cfg = canonical()
        for t in (5.5, 8.2):
            for dev in (-1.0, 0.25):
                assert cfg.stock_rate(cfg.p_star + dev, t) == pytest.approx(
                    cfg.beta_o(t) * dev, rel=1e-12)

    def test_state_invariants(self):
        cfg = canonical()
        s = cfg.state(7.0, 10.5, 6.2)
        assert s.optimal_stock == pytest.approx(cfg.ell0 + cfg.ell * s.demand, rel=1e-14)
        assert s.supply - s.demand == pytest.approx(
            cfg.beta_o(7.0) * (s.price - cfg.p_star), rel=1e-12)

    def test_validation(self):
        with pytest.raises(DomainError):
            EconConfig(gamma=0.0, lam=1.0, ell0=0.0, ell=1.0, p_star=0.0,
                       d_star=1.0, d_o=lambda t: -1.0, q_o=lambda t: 1.0)
        with pytest.raises(DomainError):
            EconConfig(gamma=1.0, lam=-0.1, ell0=0.0, ell=1.0, p_star=0.0,
                       d_star=1.0, d_o=lambda t: -1.0, q_o=lambda t: 1.0)


class TestMechanicalMapping:
    def test_constant_theta_extraction(self):
        cfg = canonical(theta=2.0)
        for t_ref in (6.0, 7.0, 9.0):
            assert abs(to_mechanical(cfg, t_ref).theta - 2.0) < 1e-10

    def test_other_parameter_set(self):
        cfg = canonical(theta=0.5, gamma=2.0, lam=1.0, ell=3.0)
        lo, hi = cfg.window
        for t_ref in np.linspace(lo * 1.01, hi * 0.99, 7):
            assert abs(to_mechanical(cfg, t_ref).theta - 0.5) < 1e-10

    def test_theta_variance_across_reference_times(self):
        cfg = canonical(theta=2.0)
        lo, hi = cfg.window
        thetas = [to_mechanical(cfg, t).theta for t in np.linspace(lo * 1.01, hi * 0.99, 50)]
        assert float(np.var(thetas)) < 1e-18

    def test_flat_coefficients_raise_mapping_error(self):
        flat = EconConfig(gamma=1.0, lam=0.0, ell0=0.0, ell=1.0, p_star=0.0,
                          d_star=1.0, d_o=lambda t: -2.0, q_o=lambda t: 3.0)
        with pytest.raises(MappingError):
            to_mechanical(flat, 5.0)

    def test_damping_matches_inverse_time(self):
        cfg = canonical(theta=2.0)
        m = to_mechanical(cfg, 8.0)
        assert m.damping_coefficient == pytest.approx(1.0 / 8.0, rel=1e-12)
        assert m.frequency_coefficient == pytest.approx((2.0 / 8.0) ** 2, rel=1e-12)


@dataclass
class FakeSolution:
    times: np.ndarray
    states: np.ndarray


class TestVerifyPriceOde:
    def trajectory(self, tol=1e-11):
        cfg = canonical()
        osc = SpringConfig(m0=1.0, t0=5.5, k0=(2.0 / 5.5) ** 2, x0=1.0)
        sol = integrate_econ(cfg, initial_from_oscillation(cfg, osc, 5.5),
                             5.5, 9.5, tol)
        return cfg, sol

    def test_constructed_trajectory_satisfies_ode(self):
        cfg, sol = self.trajectory()
        report = verify_price_ode(cfg, sol)
        assert report.max_scaled < 1e-4

    def test_equilibrium_residual_zero(self):
        cfg = canonical()
        sol = integrate_econ(cfg, None, 5.5, 9.5, 1e-10)
        report = verify_price_ode(cfg, sol)
        assert report.max_scaled == 0.0
        assert report.rms_scaled == 0.0

    def test_noise_sensitivity_is_monotone(self):
        cfg, sol = self.trajectory()
        rng = np.random.default_rng(17)
        noise = rng.normal(size=sol.states.shape)
        maxima = []
        for amp in (1e-6, 1e-4, 1e-2):
            perturbed = FakeSolution(times=sol.times.copy(),
                                     states=sol.states + amp * noise)
            maxima.append(verify_price_ode(cfg, perturbed).max_scaled)
        assert maxima[0] < maxima[1] < maxima[2]

    def test_insufficient_data_rejected(self):
        cfg = canonical()
        tiny = FakeSolution(times=np.array([5.5, 6.0, 6.5, 7.0]),
                            states=np.zeros((4, 2)))
        with pytest.raises(PreconditionError):
            verify_price_ode(cfg, tiny)


class TestLogPeriodicSimulation:
    def find_crossings(self, sol, level):
        dev = sol.states[:, 0] - level
        crossings = []
        for i in np.nonzero(np.sign(dev[:-1]) * np.sign(dev[1:]) < 0)[0]:
            a, b = sol.times[i], sol.times[i + 1]
            fa = float(sol.sample(a)[0, 0]) - level
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = float(sol.sample(m)[0, 0]) - level
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            crossings.append(0.5 * (a + b))
        return np.array(crossings)

    def test_zero_crossings_geometrically_spaced(self):
        theta = 20.0
        cfg = canonical(theta=theta)
        t_start, t_end = 410.0, 795.0
        osc = SpringConfig(m0=1.0, t0=t_start, k0=(theta / t_start) ** 2, x0=1.0)
        sol = integrate_econ(cfg, initial_from_oscillation(cfg, osc, t_start),
                             t_start, t_end, 1e-11)
        crossings = self.find_crossings(sol, cfg.p_star)
        assert len(crossings) >= 4
        ratios = np.exp(np.diff(np.log(crossings)))
        assert np.allclose(ratios, math.exp(math.pi / theta), rtol=1e-3)

    def test_serialization_round_trip(self):
        cfg = canonical(theta=2.0)
        clone = EconConfig.from_dict(cfg.to_dict())
        assert clone.window == cfg.window
        for t in (5.5, 7.7, 9.9):
            assert clone.d_o(t) == cfg.d_o(t)
            assert clone.q_o(t) == cfg.q_o(t)

    def test_hand_built_config_does_not_serialize(self):
        flat = EconConfig(gamma=1.0, lam=1.0, ell0=0.0, ell=1.0, p_star=0.0,
                          d_star=1.0, d_o=lambda t: -2.0, q_o=lambda t: 3.0)
        with pytest.raises(PreconditionError):
            flat.to_dict()
