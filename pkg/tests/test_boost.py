import math
import warnings

import numpy as np
import pytest

from qball.boost import (
    BoostError,
    BoostedField,
    ResolutionError,
    TailWarning,
    barycenter,
    half_max_widths,
    make_boost,
    pde_residual,
    sample_boosted,
)
from qball.grid import RadialProfile


def test_identity_boost():
    b = make_boost((0, 0), 0.7)
    assert b.gamma == 1.0 and b.k == (0.0, 0.0) and b.omega == 0.7


def test_gamma_factor():
    b = make_boost((0.9, 0), 0.6)
    assert b.gamma == pytest.approx(1 / math.sqrt(0.19), rel=1e-14)
    assert b.gamma == pytest.approx(2.29416, abs=1e-5)
    assert b.omega == pytest.approx(b.gamma * 0.6)
    assert b.k[0] == pytest.approx(b.gamma * 0.6 * 0.9)


@pytest.mark.parametrize("v", [(1, 0), (0.8, 0.6), (2, 0)])
def test_superluminal_rejected(v):
    with pytest.raises(BoostError):
        make_boost(v, 0.5)


def test_dispersion_identity():
    b = make_boost((0.3, -0.5), 0.8)
    assert abs(b.dispersion_defect()) < 1e-14


def test_rest_frame_modulus(gamma300):
    u = gamma300.profile
    f = sample_boosted(u, make_boost((0, 0), gamma300.omega), 0.0, (16, 16), 0.2)
    X1, X2 = np.meshgrid(f.x1, f.x2, indexing="ij")
    np.testing.assert_allclose(f.modulus, np.interp(np.hypot(X1, X2), u.r, u.values), atol=1e-15)


def test_pattern_translates(gamma300):
    u = gamma300.profile
    b = make_boost((0.9, 0), gamma300.omega)
    dx = 0.05
    f0 = sample_boosted(u, b, 0.0, (20, 16), dx)
    f1 = sample_boosted(u, b, 0.5, (20, 16), dx)  # shift 0.45 = 9 cells
    np.testing.assert_allclose(f1.modulus[9:], f0.modulus[:-9], atol=1e-12)


def test_contraction_widths(gamma300):
    b = make_boost((0.9, 0), gamma300.omega)
    dx = 0.05
    f = sample_boosted(gamma300.profile, b, 0.0, (20, 16), dx)
    w_par, w_perp = half_max_widths(f)
    assert abs(w_par - w_perp / b.gamma) <= 2 * dx


def test_barycenter_rest_and_drift(gamma300):
    dx = 0.1
    rest = sample_boosted(gamma300.profile, make_boost((0, 0), gamma300.omega), 0.0, (15, 15), dx)
    np.testing.assert_allclose(barycenter(rest), 0.0, atol=dx)
    b = make_boost((0.9, 0), gamma300.omega)
    q1 = barycenter(sample_boosted(gamma300.profile, b, 1.0, (20, 15), dx))
    q2 = barycenter(sample_boosted(gamma300.profile, b, 6.0, (20, 15), dx))
    assert np.all(np.abs((q2 - q1) - np.array([4.5, 0.0])) <= 2 * dx)


def test_barycenter_zero_field():
    z = np.zeros((5, 5), complex)
    f = BoostedField(np.arange(5.0), np.arange(5.0), z, 0.0, 1.0, (2, 2), make_boost((0, 0), 1))
    with pytest.raises(BoostError):
        barycenter(f)


def test_tail_warning(gamma300):
    with pytest.warns(TailWarning):
        sample_boosted(gamma300.profile, make_boost((0, 0), gamma300.omega), 0.0, (3, 3), 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sample_boosted(gamma300.profile, make_boost((0, 0), gamma300.omega), 0.0, (20, 20), 0.5)


def test_rest_residual_near_static(gamma300, gamma):
    b = make_boost((0, 0), gamma300.omega)
    res = pde_residual(gamma300.profile, b, gamma, 0.0, (10, 10), 0.025)
    assert res < 1e-4
    assert res > 0.5 * gamma300.static_residual * 0.01


def test_residual_of_non_solution(gamma300, gamma):
    g = gamma300.grid
    fake = RadialProfile(g, 4.0 * np.exp(-((g.r / 3) ** 2)))
    assert pde_residual(fake, make_boost((0.5, 0), 0.6), gamma, 0.0, (10, 10), 0.05) > 0.05


def test_residual_resolution_error(gamma300, gamma):
    with pytest.raises(ResolutionError):
        pde_residual(gamma300.profile, make_boost((0.9, 0), gamma300.omega), gamma, 0.0, (12, 12), 1.0)


def test_three_dimensional_profile_rejected(gamma300):
    from qball.grid import make_grid

    g3 = make_grid(3, 10, 100)
    with pytest.raises(BoostError):
        sample_boosted(RadialProfile(g3, np.exp(-g3.r**2)), make_boost((0, 0), 1), 0, (2, 2), 0.1)
