"""Property-based checks of algebraic identities on randomized inputs."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from qball.boost import make_boost
from qball.functionals import alpha_ratio, charge, hylomorphy, hylomorphy_sigma, omega_from_charge
from qball.grid import RadialProfile, integrate_radial, make_grid, radial_laplacian
from qball.potentials import builtin_potential, lambda0

GRID = make_grid(2, 20, 400)
POTS = [builtin_potential(n) for n in ("alpha_beta", "alpha_nonbeta", "nonalpha_beta", "gamma")]

amp = st.floats(0.01, 10)
width = st.floats(0.3, 5)
omega = st.floats(0.05, 3)
pot = st.sampled_from(POTS)


def bump(a, w, shift=0.0):
    return RadialProfile(GRID, a * np.exp(-(((GRID.r - shift) / w) ** 2)))


@settings(max_examples=200, deadline=None)
@given(amp, width, omega, pot)
def test_ratio_decomposition(a, w, om, p):
    u = bump(a, w)
    lhs = hylomorphy(u, om, p)
    rhs = 0.5 * om + alpha_ratio(u, p) / (2 * om)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=200, deadline=None)
@given(amp, width, st.floats(0.1, 1000), pot)
def test_sigma_ratio_identity(a, w, sigma, p):
    u = bump(a, w)
    lhs = hylomorphy_sigma(u, sigma, p)
    rhs = hylomorphy(u, omega_from_charge(u, sigma), p)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 0.99), st.floats(0, 2 * math.pi), st.floats(0.01, 5))
def test_dispersion(speed, angle, w0):
    b = make_boost((speed * math.cos(angle), speed * math.sin(angle)), w0)
    assert abs(b.dispersion_defect()) <= 1e-12 * b.omega**2
    assert b.gamma >= 1


@settings(max_examples=100, deadline=None)
@given(amp, width, st.floats(-5, 5), omega)
def test_charge_scaling(a, w, c, om):
    u = bump(a, w)
    cu = RadialProfile(GRID, c * u.values)
    assert math.isclose(charge(cu, om), c * c * charge(u, om), rel_tol=1e-12, abs_tol=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_laplacian_exact_on_quadratics(cs):
    c0, _, c2 = cs
    u = c0 + c2 * GRID.r**2
    lap = radial_laplacian(u, GRID)
    assert np.allclose(lap[:-1], 4 * c2, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(pot, st.floats(1.0, 100.0))
def test_lambda0_bounds(p, smax):
    lam = lambda0(p, s_max=smax, samples=200).lambda0
    assert 0.0 <= lam <= 1.0


@settings(max_examples=50, deadline=None)
@given(amp, width)
def test_integration_linear(a, w):
    u = bump(a, w).values
    v = bump(1.0, 1.0).values
    assert math.isclose(
        integrate_radial(GRID, u + 2 * v), integrate_radial(GRID, u) + 2 * integrate_radial(GRID, v), rel_tol=1e-12
    )
