"""Compiled inner loops.

Potentials are passed to the kernels as three parallel arrays describing a
sum of basis terms (see :mod:`qball.potentials`), so a single compiled loop
serves every built-in and user-defined nonlinearity.
"""

import math

import numpy as np
from numba import njit

POWER = 0  # c * s**k
LOG1P = 1  # c * log(1 + s)
LOGQ = 2  # c * log(1 - s + s**2)
ATAN = 3  # c * atan((2 s - 1) / sqrt(3))
CONST = 4  # c

_SQRT3 = math.sqrt(3.0)


@njit(cache=True)
def term_value(s, kinds, coeffs, powers):
    total = 0.0
    for j in range(kinds.shape[0]):
        kind = kinds[j]
        c = coeffs[j]
        if kind == POWER:
            if powers[j] == 2.0:
                total += c * (s * s)
            else:
                total += c * s ** powers[j]
        elif kind == LOG1P:
            total += c * math.log1p(s)
        elif kind == LOGQ:
            total += c * math.log1p(s * (s - 1.0))
        elif kind == ATAN:
            total += c * math.atan((2.0 * s - 1.0) / _SQRT3)
        else:
            total += c
    return total


@njit(cache=True)
def term_derivative(s, kinds, coeffs, powers):
    total = 0.0
    for j in range(kinds.shape[0]):
        kind = kinds[j]
        c = coeffs[j]
        if kind == POWER:
            k = powers[j]
            if k == 0.0:
                continue
            if k == 1.0:
                total += c
            elif k == 2.0:
                total += 2.0 * c * s
            else:
                total += c * k * s ** (k - 1.0)
        elif kind == LOG1P:
            total += c / (1.0 + s)
        elif kind == LOGQ:
            total += c * (2.0 * s - 1.0) / (1.0 - s + s * s)
        elif kind == ATAN:
            total += c * (0.5 * _SQRT3) / (1.0 - s + s * s)
    return total


@njit(cache=True)
def term_second_derivative_at_zero(kinds, coeffs, powers):
    total = 0.0
    for j in range(kinds.shape[0]):
        kind = kinds[j]
        c = coeffs[j]
        if kind == POWER:
            if powers[j] == 2.0:
                total += 2.0 * c
            elif 1.0 < powers[j] < 2.0:
                return math.inf
        elif kind == LOG1P:
            total -= c
        elif kind == LOGQ:
            total += c
        elif kind == ATAN:
            total += 0.5 * _SQRT3 * c
    return total


@njit(cache=True)
def values(s, kinds, coeffs, powers):
    out = np.empty_like(s)
    for i in range(s.shape[0]):
        out[i] = term_value(s[i], kinds, coeffs, powers)
    return out


@njit(cache=True)
def derivatives(s, kinds, coeffs, powers):
    out = np.empty_like(s)
    for i in range(s.shape[0]):
        out[i] = term_derivative(s[i], kinds, coeffs, powers)
    return out


@njit(cache=True)
def _trapezoid_norm(u, weights):
    acc = 0.0
    for i in range(u.shape[0]):
        acc += weights[i] * u[i] * u[i]
    return acc


@njit(cache=True)
def flow_steps(u, nsteps, dt, h, n, sigma, weights, kinds, coeffs, powers):
    """Advance the charge-slaved gradient flow by ``nsteps`` Euler steps.

    ``u`` is updated in place.  Returns (omega before the last step,
    omega after the last step); a NaN return means the update blew up.
    """
    m = u.shape[0] - 1
    inv_h2 = 1.0 / (h * h)
    inv_2h = 1.0 / (2.0 * h)
    new = np.empty_like(u)
    omega_prev = sigma / _trapezoid_norm(u, weights)
    omega = omega_prev
    for _ in range(nsteps):
        omega_prev = sigma / _trapezoid_norm(u, weights)
        w2 = omega_prev * omega_prev
        # r = 0: regular limit of the radial Laplacian
        s = abs(u[0])
        f = term_derivative(s, kinds, coeffs, powers)
        if u[0] < 0.0:
            f = -f
        lap = n * 2.0 * (u[1] - u[0]) * inv_h2
        new[0] = u[0] + dt * (lap - f + w2 * u[0])
        for i in range(1, m):
            r = i * h
            lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2 + (n - 1) / r * (
                u[i + 1] - u[i - 1]
            ) * inv_2h
            s = abs(u[i])
            f = term_derivative(s, kinds, coeffs, powers)
            if u[i] < 0.0:
                f = -f
            new[i] = u[i] + dt * (lap - f + w2 * u[i])
        new[m] = 0.0
        for i in range(m + 1):
            u[i] = new[i]
        norm = _trapezoid_norm(u, weights)
        if not math.isfinite(norm) or norm <= 0.0:
            return math.nan, math.nan
        omega = sigma / norm
    return omega_prev, omega


@njit(cache=True)
def _nkg_force(psi, out, h, n, kinds, coeffs, powers, d2w0):
    """Right-hand side of psi_tt = lap(psi) - W'(psi) with Dirichlet outer node."""
    m = psi.shape[0] - 1
    inv_h2 = 1.0 / (h * h)
    inv_2h = 1.0 / (2.0 * h)
    for i in range(m):
        if i == 0:
            lap = n * 2.0 * (psi[1] - psi[0]) * inv_h2
        else:
            r = i * h
            lap = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) * inv_h2 + (n - 1) / r * (
                psi[i + 1] - psi[i - 1]
            ) * inv_2h
        s = abs(psi[i])
        if s > 0.0:
            g = term_derivative(s, kinds, coeffs, powers) / s
        else:
            g = d2w0
        out[i] = lap - g * psi[i]
    out[m] = 0.0


@njit(cache=True)
def verlet_steps(psi, psi_t, nsteps, dt, h, n, kinds, coeffs, powers, d2w0):
    """Velocity-Verlet (leapfrog) steps for the radial complex NKG field.

    ``psi`` and ``psi_t`` are updated in place.  Returns False if a
    non-finite value appears.
    """
    acc = np.empty_like(psi)
    _nkg_force(psi, acc, h, n, kinds, coeffs, powers, d2w0)
    half = 0.5 * dt
    m = psi.shape[0] - 1
    for _ in range(nsteps):
        for i in range(m + 1):
            psi_t[i] += half * acc[i]
            psi[i] += dt * psi_t[i]
        psi[m] = 0.0
        _nkg_force(psi, acc, h, n, kinds, coeffs, powers, d2w0)
        for i in range(m + 1):
            psi_t[i] += half * acc[i]
        psi_t[m] = 0.0
    for i in range(m + 1):
        if not (math.isfinite(psi[i].real) and math.isfinite(psi[i].imag)):
            return False
    return True
