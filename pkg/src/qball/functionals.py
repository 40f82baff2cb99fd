"""Energy, charge and hylomorphy functionals of standing waves u(r) e^{-i omega t}.

All integrals are over R^n for radial functions, evaluated with
:func:`qball.grid.integrate_radial`.  The rest energy per unit charge is 1
because potentials are normalized to W''(0) = 1, so the hylomorphy ratio is
simply E / |H|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .grid import RadialProfile, gradient_norm_sq, integrate_radial, sphere_area
from .potentials import PotentialSpec

__all__ = [
    "DegenerateProfileError",
    "QBallDiagnostics",
    "DensityProfiles",
    "l2_norm_sq",
    "dirichlet_integral",
    "potential_integral",
    "energy",
    "charge",
    "omega_from_charge",
    "hylomorphy",
    "hylomorphy_sigma",
    "alpha_ratio",
    "gamma_ratio",
    "pohozaev_residual",
    "densities",
    "localization_radius",
    "diagnose",
]


class DegenerateProfileError(ValueError):
    """The profile has zero L2 norm, so frequency and ratios are undefined."""


def l2_norm_sq(u: RadialProfile) -> float:
    return integrate_radial(u.grid, u.values**2)


def dirichlet_integral(u: RadialProfile) -> float:
    """Integral of |grad u|^2."""
    return integrate_radial(u.grid, gradient_norm_sq(u))


def potential_integral(u: RadialProfile, p: PotentialSpec) -> float:
    return integrate_radial(u.grid, p.W_signed(u.values))


def _nonzero_l2(u):
    L = l2_norm_sq(u)
    if not L > 0.0:
        raise DegenerateProfileError("profile has zero L2 norm")
    return L


def energy(u: RadialProfile, omega: float, p: PotentialSpec) -> float:
    return 0.5 * dirichlet_integral(u) + 0.5 * omega**2 * l2_norm_sq(u) + potential_integral(u, p)


def charge(u: RadialProfile, omega: float) -> float:
    """Hylomorphic charge -omega * int u^2 (negative for omega > 0)."""
    return -omega * l2_norm_sq(u)


def omega_from_charge(u: RadialProfile, sigma: float) -> float:
    """Frequency that puts (u, omega) on the charge shell |H| = sigma."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return sigma / _nonzero_l2(u)


def hylomorphy(u: RadialProfile, omega: float, p: PotentialSpec) -> float:
    return energy(u, omega, p) / abs(charge(u, omega))


def hylomorphy_sigma(u: RadialProfile, sigma: float, p: PotentialSpec) -> float:
    """Charge-reduced ratio, the functional minimized by the gradient flow."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    L = _nonzero_l2(u)
    return (0.5 * dirichlet_integral(u) + potential_integral(u, p)) / sigma + sigma / (2.0 * L)


def alpha_ratio(u: RadialProfile, p: PotentialSpec) -> float:
    L = _nonzero_l2(u)
    return (0.5 * dirichlet_integral(u) + potential_integral(u, p)) / (0.5 * L)


def gamma_ratio(u: RadialProfile) -> float:
    return dirichlet_integral(u) / _nonzero_l2(u)


def pohozaev_residual(u: RadialProfile, omega: float, p: PotentialSpec) -> float:
    """|(1/n - 1/2) int|grad u|^2 - int (W - omega^2 u^2 / 2)| / E.

    Vanishes (up to discretization) only at finite-energy solutions of the
    static equation -lap u + W'(u) = omega^2 u.
    """
    n = u.grid.n
    grad = dirichlet_integral(u)
    L = l2_norm_sq(u)
    pot = potential_integral(u, p)
    lhs = (1.0 / n - 0.5) * grad
    rhs = pot - 0.5 * omega**2 * L
    E = 0.5 * grad + 0.5 * omega**2 * L + pot
    return abs(lhs - rhs) / E


@dataclass(frozen=True)
class DensityProfiles:
    r: np.ndarray
    rho_E: np.ndarray
    rho_H: np.ndarray
    rho_B: np.ndarray
    support: tuple[tuple[float, float], ...]

    @property
    def support_nonempty(self) -> bool:
        return len(self.support) > 0


def _support_intervals(r, mask):
    out = []
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return ()
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    ends = np.concatenate((idx[breaks], [idx[-1]]))
    for a, b in zip(starts, ends):
        out.append((float(r[a]), float(r[b])))
    return tuple(out)


def densities(u: RadialProfile, omega: float, p: PotentialSpec) -> DensityProfiles:
    v = u.values
    rho_E = 0.5 * gradient_norm_sq(u) + 0.5 * omega**2 * v**2 + p.W_signed(v)
    rho_H = -omega * v**2
    rho_B = np.maximum(0.0, np.abs(rho_H) - rho_E)
    return DensityProfiles(u.r, rho_E, rho_H, rho_B, _support_intervals(u.r, rho_B > 0.0))


def localization_radius(u: RadialProfile, eps: float) -> float:
    """Smallest R with int_{|x|>R} u^2 < eps * int u^2 (charge-density mass)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    g = u.grid
    integrand = sphere_area(g.n) * g.r ** (g.n - 1) * u.values**2
    mass = cumulative_trapezoid(integrand, g.r, initial=0.0)
    total = mass[-1]
    if not total > 0:
        raise DegenerateProfileError("profile has zero L2 norm")
    target = (1.0 - eps) * total
    k = int(np.searchsorted(mass, target, side="left"))
    if k == 0:
        return 0.0
    if k >= len(mass):
        return float(g.r_max)
    # linear interpolation inside the crossing cell
    m0, m1 = mass[k - 1], mass[k]
    frac = (target - m0) / (m1 - m0) if m1 > m0 else 1.0
    return float(g.r[k - 1] + frac * g.h)


@dataclass(frozen=True)
class QBallDiagnostics:
    omega: float
    E: float
    H: float
    Lambda: float
    alpha: float
    Gamma: float
    sup_norm: float
    pohozaev_residual: float
    min_value: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def diagnose(u: RadialProfile, omega: float, p: PotentialSpec) -> QBallDiagnostics:
    E = energy(u, omega, p)
    H = charge(u, omega)
    return QBallDiagnostics(
        omega=float(omega),
        E=E,
        H=H,
        Lambda=E / abs(H),
        alpha=alpha_ratio(u, p),
        Gamma=gamma_ratio(u),
        sup_norm=u.sup_norm,
        pohozaev_residual=pohozaev_residual(u, omega, p),
        min_value=float(np.min(u.values)),
    )
