"""Radial time evolution of the complex field equation psi_tt = lap psi - W'(psi).

W'(psi) = W'(|psi|) psi / |psi|, with the limit W''(0) psi at psi = 0.
Velocity Verlet on the same radial stencil as the gradient flow, so a
converged profile is an exact standing wave of the semi-discrete system
and the modulus deviation measures pure time-stepping error.  The outer
node is held at zero; a warning fires when the field reaches it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .flow import QBallSolution
from .functionals import localization_radius
from .grid import RadialGrid, RadialProfile, gradient_norm_sq, integrate_radial
from .potentials import PotentialSpec

__all__ = [
    "CFLError",
    "EvolutionBlowupError",
    "DomainTooSmallWarning",
    "LedgerRow",
    "EvolutionState",
    "StabilityReport",
    "init_state",
    "evolve_step",
    "advance",
    "conserved",
    "modulus_deviation",
    "max_stable_dt",
    "stability_run",
    "MAX_PERTURBATION",
    "MAX_PERIODS",
]

MAX_PERTURBATION = 0.1
MAX_PERIODS = 100


class CFLError(ValueError):
    pass


class EvolutionBlowupError(RuntimeError):
    pass


class DomainTooSmallWarning(UserWarning):
    """Energy piles up near the outer wall, so reflections contaminate the run."""


@dataclass(frozen=True)
class LedgerRow:
    t: float
    E: float
    H: float
    deviation: float
    localization_radius: float


@dataclass
class EvolutionState:
    grid: RadialGrid
    psi: np.ndarray
    psi_t: np.ndarray
    time: float
    reference: np.ndarray  # |psi| at t = 0 of the unperturbed wave
    omega: float
    ledger: list[LedgerRow] = field(default_factory=list)

    def copy(self) -> "EvolutionState":
        return EvolutionState(
            self.grid, self.psi.copy(), self.psi_t.copy(), self.time, self.reference, self.omega, list(self.ledger)
        )


def max_stable_dt(grid: RadialGrid) -> float:
    """h sqrt(2/n): light-cone CFL, tightened by the stiffer origin row for n > 2."""
    return grid.h * min(1.0, math.sqrt(2.0 / grid.n))


def _bump(u: RadialProfile) -> np.ndarray:
    v = u.values
    peak = np.max(np.abs(v))
    inside = u.r[np.abs(v) >= 0.5 * peak] if peak > 0 else u.r[:1]
    width = max(float(inside.max()), 2.0 * u.grid.h)
    return np.exp(-0.5 * (u.r / width) ** 2)


def init_state(u, omega: float | None = None, perturbation_amp: float = 0.0) -> EvolutionState:
    """psi = u (1 + amp * bump(r)), psi_t = -i omega u at t = 0.

    ``u`` is a QBallSolution (must be converged; omega taken from it unless
    given) or a raw RadialProfile with an explicit omega, used as-is.
    """
    if isinstance(u, QBallSolution):
        if not u.converged:
            raise ValueError(f"sigma={u.sigma:g} did not converge; no standing wave to evolve")
        omega = u.omega if omega is None else omega
        u = u.profile
    if omega is None:
        raise ValueError("omega is required for a raw profile")
    if not abs(perturbation_amp) <= MAX_PERTURBATION:
        raise ValueError(f"|perturbation_amp| must be <= {MAX_PERTURBATION}, got {perturbation_amp}")
    psi = u.values * (1.0 + perturbation_amp * _bump(u))
    psi = psi.astype(complex)
    psi[-1] = 0.0
    psi_t = (-1j * omega) * u.values.astype(complex)
    state = EvolutionState(u.grid, psi, psi_t, 0.0, np.abs(u.values), float(omega))
    _record(state, None)
    return state


def conserved(state: EvolutionState, p: PotentialSpec) -> tuple[float, float]:
    """(E, H) with E = int 1/2|psi_t|^2 + 1/2|grad psi|^2 + W(|psi|), H = int Im(psi_t conj(psi))."""
    g = state.grid
    dens = 0.5 * np.abs(state.psi_t) ** 2 + 0.5 * gradient_norm_sq(state.psi, g) + p.W(np.abs(state.psi))
    E = integrate_radial(g, dens)
    H = integrate_radial(g, np.imag(state.psi_t * np.conj(state.psi)))
    return E, H


def modulus_deviation(state: EvolutionState) -> float:
    """sup | |psi| - u | / sup u.  |psi| ignores the global phase, so this is
    already the minimum over phase rotations."""
    ref = state.reference
    dev = float(np.max(np.abs(np.abs(state.psi) - ref)))
    scale = float(np.max(ref))
    return dev / scale if scale > 0 else dev


def _record(state, p):
    if p is None:
        E = H = math.nan
    else:
        E, H = conserved(state, p)
    mod = RadialProfile(state.grid, np.abs(state.psi))
    R = localization_radius(mod, 1e-3) if mod.sup_norm > 0 else 0.0
    if state.ledger and state.time <= state.ledger[-1].t:
        raise ValueError("ledger times must increase")
    state.ledger.append(LedgerRow(state.time, E, H, modulus_deviation(state), R))


def advance(state: EvolutionState, p: PotentialSpec, dt: float, nsteps: int) -> EvolutionState:
    """nsteps Verlet steps in place (compiled); returns the same state."""
    if not dt > 0:
        raise CFLError("dt must be positive")
    limit = max_stable_dt(state.grid)
    if dt > limit * (1.0 + 1e-12):
        raise CFLError(f"dt={dt:g} violates the CFL limit {limit:g} (h={state.grid.h:g})")
    g = state.grid
    kinds, coeffs, powers = p.arrays
    ok = _kernels.verlet_steps(state.psi, state.psi_t, int(nsteps), dt, g.h, g.n, kinds, coeffs, powers, p.ddW0())
    if not ok:
        raise EvolutionBlowupError(f"non-finite field near t={state.time + nsteps * dt:g}")
    state.time += nsteps * dt
    return state


def evolve_step(state: EvolutionState, p: PotentialSpec, dt: float) -> EvolutionState:
    """One time-centered step; the input state is left untouched."""
    return advance(state.copy(), p, dt, 1)


@dataclass
class StabilityReport:
    max_modulus_deviation: float
    E_drift: float
    H_drift: float
    localization_radius_series: list[tuple[float, float]]
    periods: float
    dt: float
    reflection_warning: bool
    ledger: list[LedgerRow]

    def as_dict(self) -> dict:
        return {
            "max_modulus_deviation": self.max_modulus_deviation,
            "E_drift": self.E_drift,
            "H_drift": self.H_drift,
            "periods": self.periods,
            "dt": self.dt,
            "reflection_warning": self.reflection_warning,
        }


def _tail_energy_fraction(state, p, E):
    g = state.grid
    k = int(math.floor(0.9 * g.M))
    dens = 0.5 * np.abs(state.psi_t) ** 2 + 0.5 * gradient_norm_sq(state.psi, g) + p.W(np.abs(state.psi))
    return float(np.dot(g.weights[k:], dens[k:]) / E) if E > 0 else 0.0


def stability_run(
    u,
    omega: float | None,
    p: PotentialSpec,
    perturbation_amp: float = 0.0,
    T: float | None = None,
    periods: float = 50.0,
    dt: float | None = None,
    samples_per_period: int = 1,
) -> StabilityReport:
    """Evolve standing-wave data and track deviation, conservation and spread.

    The ledger is sampled ``samples_per_period`` times per period 2 pi / omega.
    Runs longer than 100 periods are refused.
    """
    state = init_state(u, omega, perturbation_amp)
    omega = state.omega
    period = 2.0 * math.pi / omega
    T = periods * period if T is None else float(T)
    if not 0 < T <= MAX_PERIODS * period * (1 + 1e-12):
        raise ValueError(f"T must lie in (0, {MAX_PERIODS} periods = {MAX_PERIODS * period:g}]")
    g = state.grid
    dt = 0.5 * max_stable_dt(g) if dt is None else dt
    interval = period / samples_per_period
    per_sample = max(1, int(math.ceil(interval / dt)))
    dt = interval / per_sample
    state.ledger.clear()
    _record(state, p)
    E0, H0 = state.ledger[0].E, state.ledger[0].H
    reflection = False
    nsamples = int(math.ceil(T / interval - 1e-9))
    for _ in range(nsamples):
        advance(state, p, dt, per_sample)
        _record(state, p)
        if not reflection and _tail_energy_fraction(state, p, state.ledger[-1].E) > 0.01:
            reflection = True
            warnings.warn(
                f"over 1% of the energy sits in the outer 10% of the domain at t={state.time:g}; "
                "enlarge r_max",
                DomainTooSmallWarning,
                stacklevel=2,
            )
    led = state.ledger
    E = np.array([row.E for row in led])
    H = np.array([row.H for row in led])
    return StabilityReport(
        max_modulus_deviation=max(row.deviation for row in led),
        E_drift=float(np.max(np.abs(E - E0)) / abs(E0)),
        H_drift=float(np.max(np.abs(H - H0)) / abs(H0)) if H0 != 0 else float(np.max(np.abs(H))),
        localization_radius_series=[(row.t, row.localization_radius) for row in led],
        periods=state.time / period,
        dt=dt,
        reflection_warning=reflection,
        ledger=led,
    )
