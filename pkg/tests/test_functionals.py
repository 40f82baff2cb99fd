import math

import numpy as np
import pytest

from qball.functionals import (
    DegenerateProfileError,
    alpha_ratio,
    charge,
    densities,
    diagnose,
    energy,
    gamma_ratio,
    hylomorphy,
    hylomorphy_sigma,
    l2_norm_sq,
    localization_radius,
    omega_from_charge,
)
from qball.grid import RadialProfile, integrate_radial, make_grid


@pytest.fixture(scope="module")
def fine():
    return make_grid(2, 20, 8000)


@pytest.fixture(scope="module")
def gauss(fine):
    return RadialProfile(fine, np.exp(-fine.r**2))


def test_zero_profile(fine, quadratic):
    z = RadialProfile(fine, np.zeros(fine.points))
    assert energy(z, 0.7, quadratic) == 0.0
    assert charge(z, 0.7) == 0.0
    with pytest.raises(DegenerateProfileError):
        omega_from_charge(z, 1.0)
    with pytest.raises(DegenerateProfileError):
        hylomorphy_sigma(z, 1.0, quadratic)
    d = densities(z, 0.5, quadratic)
    assert not d.support_nonempty
    assert np.all(d.rho_B == 0)


def test_gaussian_energy(gauss, quadratic):
    # int |grad u|^2 = pi, int u^2 = pi/2
    assert energy(gauss, 0.5, quadratic) == pytest.approx(0.5 * math.pi + 0.125 * math.pi / 2 + 0.25 * math.pi, rel=2e-5)


def test_gaussian_charge_and_omega(gauss):
    assert charge(gauss, 1.0) == pytest.approx(-math.pi / 2, rel=2e-5)
    assert omega_from_charge(gauss, math.pi) == pytest.approx(2.0, rel=2e-5)


def test_charge_direct_formula(fine):
    u = RadialProfile(fine, np.exp(-fine.r**2))
    c = math.sqrt(600 / l2_norm_sq(u))
    big = RadialProfile(fine, c * u.values)
    assert charge(big, 0.5) == pytest.approx(-300, rel=1e-12)
    assert omega_from_charge(big, 300) == pytest.approx(0.5, rel=1e-12)
    unit = RadialProfile(fine, u.values / math.sqrt(l2_norm_sq(u)))
    assert omega_from_charge(unit, 1.0) == pytest.approx(1.0, rel=1e-12)


def test_charge_quadratic_homogeneity(gauss):
    for c in (0.3, 2.0, 7.5):
        scaled = RadialProfile(gauss.grid, c * gauss.values)
        assert charge(scaled, 0.8) == pytest.approx(c**2 * charge(gauss, 0.8), rel=1e-12)


def test_gaussian_ratios(gauss, quadratic):
    assert gamma_ratio(gauss) == pytest.approx(2.0, rel=1e-5)
    assert alpha_ratio(gauss, quadratic) == pytest.approx(3.0, rel=1e-5)


def test_alpha_at_least_one_for_quadratic(fine, quadratic):
    plateau = RadialProfile(fine, (fine.r < 3).astype(float))
    assert alpha_ratio(plateau, quadratic) >= 1.0


def test_min_over_omega_is_sqrt_alpha(gauss, gamma):
    a = alpha_ratio(gauss, gamma)
    w = np.linspace(0.2, 3, 20001)
    lam = [hylomorphy(gauss, x, gamma) for x in w[::100]]
    fine_w = w[::100]
    k = int(np.argmin(lam))
    assert min(lam) == pytest.approx(math.sqrt(a), rel=1e-4)
    assert fine_w[k] == pytest.approx(math.sqrt(a), abs=0.02)


def test_sigma_ratio_both_formulas(gauss, gamma):
    sigma = math.pi
    w = omega_from_charge(gauss, sigma)
    assert hylomorphy_sigma(gauss, sigma, gamma) == pytest.approx(hylomorphy(gauss, w, gamma), rel=1e-13)


def test_density_integrals(gauss, gamma):
    d = densities(gauss, 0.6, gamma)
    g = gauss.grid
    assert integrate_radial(g, d.rho_E) == pytest.approx(energy(gauss, 0.6, gamma), rel=1e-12)
    assert integrate_radial(g, d.rho_H) == pytest.approx(charge(gauss, 0.6), rel=1e-12)
    assert np.all(d.rho_B >= 0)


def test_binding_density_vanishes_for_slow_quadratic(gauss, quadratic):
    d = densities(gauss, 0.1, quadratic)
    assert np.all(d.rho_B == 0) and not d.support_nonempty


def test_binding_support_intervals(fine, gamma):
    u = RadialProfile(fine, 3.0 * np.exp(-((fine.r / 3) ** 2)))
    d = densities(u, 0.6, gamma)
    assert d.support_nonempty
    lo, hi = d.support[0]
    assert lo == 0.0 and hi > 0


def test_localization_radius(gauss):
    # tail fraction of a Gaussian charge density: exp(-2 R^2)
    for R in (0.5, 1.0, 1.5):
        eps = math.exp(-2 * R**2)
        assert localization_radius(gauss, eps) == pytest.approx(R, abs=2e-3)
    assert localization_radius(gauss, 1 - 1e-12) < 1e-3
    rs = [localization_radius(gauss, e) for e in (1e-6, 1e-3, 1e-1, 0.5)]
    assert all(b <= a for a, b in zip(rs, rs[1:]))
    with pytest.raises(ValueError):
        localization_radius(gauss, 1.5)


def test_localization_radius_compact_support(fine):
    u = RadialProfile(fine, np.where(fine.r <= 4.0, 1.0, 0.0))
    assert localization_radius(u, 1e-12) == pytest.approx(4.0, abs=fine.h)


def test_diagnose_consistency(gauss, gamma):
    d = diagnose(gauss, 0.7, gamma)
    assert d.H == pytest.approx(-0.7 * l2_norm_sq(gauss))
    assert d.Lambda == pytest.approx(d.E / abs(d.H))
    assert d.Lambda == pytest.approx(0.35 + d.alpha / 1.4, rel=1e-13)
    assert set(d.as_dict()) >= {"E", "H", "Lambda", "alpha", "Gamma", "sup_norm", "pohozaev_residual", "omega"}


def test_soliton_ratio_below_one(gamma300):
    d = gamma300.diagnostics
    assert d.Lambda == pytest.approx(d.E / 300, rel=1e-12)
    assert d.Lambda < 1
