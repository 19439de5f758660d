"""Named invariant suites behind the ``check`` CLI command.

Each check returns a CheckResult; a suite passes when every check passes.
All randomness is seeded, so repeated runs give identical tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import econ as econ_mod
from . import tsallis as ts
from .errors import MappingError
from .fitter import TimeSeries, fit
from .integrator import integrate_econ, integrate_spring_reduced
from .oscillator import SpringConfig, extremum_times, mass_consistency_residual

__all__ = ["CheckResult", "SUITES", "run_suite", "suite_names"]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _result(suite, name, passed, detail):
    return CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail)


# ---------------------------------------------------------------- oscillator

_OSC = SpringConfig(m0=1.0, t0=1.0, k0=4.0, x0=1.0, x1=0.0)


def _check_km_product():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        m0, t0, k0 = rng.uniform(0.05, 20.0, size=3)
        cfg = SpringConfig(m0=m0, t0=t0, k0=k0, x0=1.0)
        ts_grid = np.geomspace(t0 / 10.0, 1000.0 * t0, 64)
        prod = cfg.stiffness_at(ts_grid) * cfg.mass_at(ts_grid)
        ulps = np.abs(prod - k0 * m0) / np.spacing(k0 * m0)
        worst = max(worst, float(np.max(ulps)))
    return _result("oscillator", "stiffness_mass_product", worst <= 4.0,
                   f"max deviation {worst:.2f} ulp (limit 4)")


def _check_ode_residual():
    cfg = SpringConfig(m0=1.0, t0=1.0, k0=4.0, x0=1.0, x1=0.5)
    t = np.geomspace(0.2, 200.0, 400)
    res = t * t * cfg.acceleration(t) + t * cfg.velocity(t) + cfg.theta ** 2 * cfg.position(t)
    scale = cfg.theta ** 2 * (abs(cfg.x0) + abs(cfg.x1))
    worst = float(np.max(np.abs(res))) / scale
    return _result("oscillator", "closed_form_solves_ode", worst < 1e-12,
                   f"max scaled residual {worst:.2e} (limit 1e-12)")


def _check_energy_law():
    t = np.geomspace(_OSC.t0, 100.0 * _OSC.t0, 500)
    ratio = _OSC.energy(t) * t / (_OSC.energy(_OSC.t0) * _OSC.t0)
    worst = float(np.max(np.abs(ratio - 1.0)))
    return _result("oscillator", "energy_law", worst < 1e-12,
                   f"max |E(t)t/E(t0)t0 - 1| = {worst:.2e} (limit 1e-12)")


def _check_universal_relation():
    t = np.geomspace(_OSC.t0, 100.0 * _OSC.t0, 1000)
    from .oscillator import universal_residual

    worst = float(np.max(np.abs(universal_residual(_OSC, t))))
    return _result("oscillator", "universal_relation", worst < 1e-12,
                   f"max |residual| = {worst:.2e} at 1000 points (limit 1e-12)")


def _check_scale_covariance():
    worst = 0.0
    for c in (0.1, 2.0, 17.5):
        # k0 -> k0/c^2 keeps theta fixed, so only the ratio t/t0 matters
        scaled = SpringConfig(m0=_OSC.m0, t0=c * _OSC.t0, k0=_OSC.k0 / (c * c), x0=1.0)
        t = np.geomspace(_OSC.t0, 50.0 * _OSC.t0, 200)
        worst = max(worst, float(np.max(np.abs(scaled.position(c * t) - _OSC.position(t)))))
    return _result("oscillator", "scale_covariance", worst < 1e-12,
                   f"max |x(c*t; c*t0) - x(t; t0)| = {worst:.2e} (limit 1e-12)")


def _check_log_periodicity():
    t = np.geomspace(0.2, 300.0, 300)
    shift = math.exp(2.0 * math.pi / _OSC.theta)
    worst = float(np.max(np.abs(_OSC.position(t * shift) - _OSC.position(t))))
    return _result("oscillator", "log_periodicity", worst < 1e-12,
                   f"max period-shift deviation {worst:.2e} (limit 1e-12)")


def _check_mass_consistency():
    worst = 0.0
    for theta, mult in ((2.0, math.e), (1.0, 10.0), (5.0, 10.0)):
        cfg = SpringConfig(m0=1.0, t0=1.0, k0=theta * theta, x0=1.0)
        worst = max(worst, abs(mass_consistency_residual(cfg, mult * cfg.t0)))
    return _result("oscillator", "mass_consistency", worst < 1e-8,
                   f"max |quadrature - ln(t/t0)| = {worst:.2e} (limit 1e-8)")


def _check_extremum_spacing():
    ext = extremum_times(_OSC, 0, 6)
    ratios = np.concatenate([np.diff(np.log(ext.position)), np.diff(np.log(ext.velocity))])
    worst = float(np.max(np.abs(ratios - math.pi / _OSC.theta)))
    return _result("oscillator", "extremum_geometric_spacing", worst < 1e-12,
                   f"max |ln spacing - pi/theta| = {worst:.2e} (limit 1e-12)")


# ---------------------------------------------------------------------- econ

def _canonical_econ():
    return econ_mod.EconConfig.log_periodic(gamma=1.0, lam=1.0, ell=1.0, ell0=1.0,
                                            p_star=10.0, d_star=5.0, theta=2.0)


def _check_coefficient_identities():
    cfg = _canonical_econ()
    rng = np.random.default_rng(7)
    lo, hi = cfg.window
    t = rng.uniform(lo * (1 + 1e-9), hi * (1 - 1e-9), size=100)
    le = cfg.lam * cfg.ell
    worst = 0.0
    for ti in t:
        beta = cfg.beta_o(ti)
        lhs1 = le * cfg.d_o(ti)
        rhs1 = cfg.gamma * beta - 1.0 / ti
        lhs2 = le * cfg.q_o(ti)
        rhs2 = (cfg.gamma + le) * beta - 1.0 / ti
        scale = max(abs(rhs1), abs(rhs2), 1.0 / ti)
        worst = max(worst, abs(lhs1 - rhs1) / scale, abs(lhs2 - rhs2) / scale)
    return _result("econ", "coefficient_identities", worst < 1e-12,
                   f"max relative identity error {worst:.2e} at 100 points (limit 1e-12)")


def _check_damping_identity():
    cfg = _canonical_econ()
    rng = np.random.default_rng(13)
    lo, hi = cfg.window
    t = rng.uniform(lo * (1 + 1e-9), hi * (1 - 1e-9), size=100)
    worst = 0.0
    for ti in t:
        damping = cfg.gamma * cfg.beta_o(ti) - cfg.lam * cfg.ell * cfg.d_o(ti)
        worst = max(worst, abs(damping - 1.0 / ti) * ti)
    return _result("econ", "damping_identity", worst < 1e-12,
                   f"max relative deviation from 1/t is {worst:.2e} (limit 1e-12)")


def _check_sign_window():
    cfg = _canonical_econ()
    lo, hi = cfg.window
    inside = np.linspace(lo * (1 + 1e-9), hi * (1 - 1e-9), 200)
    ok = all(cfg.d_o(t) < 0.0 and cfg.q_o(t) > 0.0 and cfg.beta_o(t) > 0.0 for t in inside)
    ok = ok and cfg.d_o(lo) == 0.0 and cfg.q_o(hi) == 0.0
    broad = np.geomspace(0.01, 1000.0, 100)
    ok = ok and all(cfg.beta_o(t) > 0.0 for t in broad)
    return _result("econ", "sign_window", ok,
                   f"d_o < 0 < q_o on ({lo:g}, {hi:g}); endpoints vanish; beta_o > 0")


def _check_equilibrium_fixed_point():
    cfg = _canonical_econ()
    # same coefficient family with no declared window: dynamics are defined
    # for all t > 0, so the fixed point can be tracked over a 10x span
    free = econ_mod.EconConfig(gamma=cfg.gamma, lam=cfg.lam, ell0=cfg.ell0, ell=cfg.ell,
                               p_star=cfg.p_star, d_star=cfg.d_star,
                               d_o=cfg.d_o, q_o=cfg.q_o, window=None)
    tol = 1e-10
    sol = integrate_econ(free, (free.p_star, free.s_star), 2.0, 20.0, tol)
    scale = max(abs(free.p_star), abs(free.s_star), 1.0)
    drift = float(np.max(np.abs(sol.states - np.array([free.p_star, free.s_star])))) / scale
    return _result("econ", "equilibrium_fixed_point", drift < tol,
                   f"relative drift {drift:.2e} over 10x window (limit {tol:g})")


def _check_dictionary_constancy():
    cfg = _canonical_econ()
    lo, hi = cfg.window
    t_refs = np.linspace(lo * 1.01, hi * 0.99, 50)
    thetas = np.array([econ_mod.to_mechanical(cfg, t).theta for t in t_refs])
    var = float(np.var(thetas))
    ok = var < 1e-18
    # a flat hand-built family must not map onto an oscillatory regime
    flat = econ_mod.EconConfig(gamma=1.0, lam=0.0, ell0=1.0, ell=1.0, p_star=10.0,
                               d_star=5.0, d_o=lambda t: -2.0, q_o=lambda t: 3.0)
    try:
        econ_mod.to_mechanical(flat, 5.0)
        ok = False
    except MappingError:
        pass
    return _result("econ", "dictionary_constancy", ok,
                   f"var(theta over 50 t_ref) = {var:.2e} (limit 1e-18)")


def _check_price_ode_residual():
    cfg = _canonical_econ()
    osc = SpringConfig(m0=1.0, t0=5.5, k0=4.0 / 5.5 ** 2, x0=1.0)
    initial = econ_mod.initial_from_oscillation(cfg, osc, 5.5)
    sol = integrate_econ(cfg, initial, 5.5, 9.5, 1e-11)
    report = econ_mod.verify_price_ode(cfg, sol)
    return _result("econ", "price_ode_residual", report.max_scaled < 1e-4,
                   f"scaled max residual {report.max_scaled:.2e} (limit 1e-4)")


def _check_zero_crossing_spacing():
    theta = 20.0
    cfg = econ_mod.EconConfig.log_periodic(gamma=1.0, lam=1.0, ell=1.0, ell0=1.0,
                                           p_star=10.0, d_star=5.0, theta=theta)
    t_start, t_end = 410.0, 795.0
    osc = SpringConfig(m0=1.0, t0=t_start, k0=(theta / t_start) ** 2, x0=1.0)
    sol = integrate_econ(cfg, econ_mod.initial_from_oscillation(cfg, osc, t_start),
                         t_start, t_end, 1e-11)
    dev = sol.states[:, 0] - cfg.p_star
    crossings = []
    for i in np.nonzero(np.sign(dev[:-1]) * np.sign(dev[1:]) < 0)[0]:
        a, b = sol.times[i], sol.times[i + 1]
        fa = float(sol.sample(a)[0, 0]) - cfg.p_star
        for _ in range(80):  # bisection on the dense output
            m = 0.5 * (a + b)
            fm = float(sol.sample(m)[0, 0]) - cfg.p_star
            if fa * fm <= 0.0:
                b = m
            else:
                a, fa = m, fm
        crossings.append(0.5 * (a + b))
    ratios = np.diff(np.log(crossings))
    expected = math.pi / theta
    worst = float(np.max(np.abs(ratios / expected - 1.0))) if len(ratios) else math.inf
    return _result("econ", "zero_crossing_spacing", worst < 1e-3,
                   f"{len(crossings)} crossings; max ratio error {worst:.2e} (limit 1e-3)")


# ------------------------------------------------------------------- tsallis

def _random_factorization(rng, n):
    mu = rng.uniform(0.2, 1.5, size=n)
    nu = rng.uniform(0.2, 1.5, size=n)
    nu /= np.dot(mu, nu)
    return ts.ProbabilityFactorization(mu=mu, nu=nu)


def _check_thermo_identity():
    rng = np.random.default_rng(23)
    worst = 0.0
    for n in (1, 2, 5, 16):
        pf = _random_factorization(rng, n)
        rep = ts.thermo(pf)
        worst = max(worst, abs(rep.helmholtz_reduced
                               - (rep.internal_reduced - rep.entropy_reduced)))
    return _result("tsallis", "thermo_identity", worst < 1e-12,
                   f"max |A - (E - TS)| = {worst:.2e} reduced (limit 1e-12)")


def _check_factorization_invariance():
    rng = np.random.default_rng(29)
    pf = _random_factorization(rng, 8)
    worst = 0.0
    for c in (0.5, 2.0, 7.0):
        regrouped = ts.ProbabilityFactorization(mu=pf.mu * c, nu=pf.nu / c)
        worst = max(worst, abs(ts.thermo(regrouped).entropy_reduced
                               - ts.thermo(pf).entropy_reduced))
    return _result("tsallis", "factorization_invariance", worst < 1e-12,
                   f"max entropy change under regrouping {worst:.2e} (limit 1e-12)")


def _check_shannon_limit():
    p = np.array([0.5, 0.25, 0.125, 0.125])
    s1 = ts.shannon_entropy(p)
    errs = [abs(ts.tsallis_entropy(p, 1.0 + eps) - s1) + abs(ts.tsallis_entropy(p, 1.0 - eps) - s1)
            for eps in (1e-3, 5e-4, 2.5e-4)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(1.7 < r < 2.3 for r in ratios) and errs[2] < 1e-3
    return _result("tsallis", "shannon_limit", ok,
                   f"halving |q-1| halves the error: ratios {ratios[0]:.2f}, {ratios[1]:.2f}")


def _check_pseudo_additivity():
    rng = np.random.default_rng(31)
    p = rng.uniform(0.1, 1.0, size=3)
    p /= p.sum()
    r = rng.uniform(0.1, 1.0, size=4)
    r /= r.sum()
    joint = np.outer(p, r).ravel()
    worst = 0.0
    for q in (0.5, 2.0, 3.0):
        lhs = ts.tsallis_entropy(joint, q)
        sp, sr = ts.tsallis_entropy(p, q), ts.tsallis_entropy(r, q)
        worst = max(worst, abs(lhs - (sp + sr + (1.0 - q) * sp * sr)))
    return _result("tsallis", "pseudo_additivity", worst < 1e-10,
                   f"max additivity defect {worst:.2e} (limit 1e-10)")


def _check_entropic_term_identity():
    rng = np.random.default_rng(37)
    worst = 0.0
    for _ in range(50):
        p = rng.uniform(0.01, 1.0, size=6)
        p /= p.sum()
        for q in (2.0, 3.0, 5.0):
            worst = max(worst, abs(ts.tsallis_entropy(p, q)
                                   - (1.0 / (q - 1.0) - ts.entropic_term(p, q))))
    return _result("tsallis", "entropic_term_identity", worst < 1e-12,
                   f"max identity defect {worst:.2e} (limit 1e-12)")


def _check_correspondence_reduction():
    cfg = _canonical_econ()
    spring = SpringConfig(m0=1.0, t0=1.0, k0=4.0, x0=1.0)
    worst = 0.0
    for t in (5.5, 7.0, 9.4):
        for x in (-2.0, 0.3, 1.0):
            demand_value = cfg.demand(cfg.p_star + x, t)
            got = ts.demand_correspondence_lhs(cfg, spring, demand_value, t)
            want = -0.5 * (spring.k0 * spring.t0 * x / t) ** 2
            scale = max(abs(want), 1e-30)
            worst = max(worst, abs(got - want) / scale)
    return _result("tsallis", "correspondence_reduction", worst < 1e-12,
                   f"max relative reduction defect {worst:.2e} (limit 1e-12)")


def _check_uniform_values():
    p4 = np.full(4, 0.25)
    ok = (ts.tsallis_entropy(p4, 2.0) == 0.75
          and ts.entropic_term(p4, 2.0) == 0.25
          and ts.tsallis_entropy(np.array([1.0, 0.0, 0.0]), 2.0) == 0.0)
    return _result("tsallis", "uniform_and_degenerate_values", ok,
                   "S_2(uniform W=4) = 0.75, term = 0.25, S_q(certainty) = 0")


SUITES: Dict[str, List[Callable[[], CheckResult]]] = {
    "oscillator": [
        _check_km_product,
        _check_ode_residual,
        _check_energy_law,
        _check_universal_relation,
        _check_scale_covariance,
        _check_log_periodicity,
        _check_mass_consistency,
        _check_extremum_spacing,
    ],
    "econ": [
        _check_coefficient_identities,
        _check_damping_identity,
        _check_sign_window,
        _check_equilibrium_fixed_point,
        _check_dictionary_constancy,
        _check_price_ode_residual,
        _check_zero_crossing_spacing,
    ],
    "tsallis": [
        _check_thermo_identity,
        _check_factorization_invariance,
        _check_shannon_limit,
        _check_pseudo_additivity,
        _check_entropic_term_identity,
        _check_correspondence_reduction,
        _check_uniform_values,
    ],
}


def suite_names():
    return list(SUITES) + ["all"]


def run_suite(name: str) -> List[CheckResult]:
    if name == "all":
        results = []
        for suite in SUITES.values():
            results.extend(check() for check in suite)
        return results
    if name not in SUITES:
        raise KeyError(name)
    return [check() for check in SUITES[name]]
