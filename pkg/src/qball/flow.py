"""Gradient-flow construction of Q-balls at fixed hylomorphic charge.

The profile evolves in pseudo-time by

    du/dt = lap u - W'(u) + omega^2 u,    omega = sigma / int u^2,

with u = 0 at the outer radius.  This is the L2 gradient flow of the
charge-reduced hylomorphy ratio (scaled by sigma), so its fixed points are
standing waves with |H| = sigma and the ratio never increases along it.
Time stepping is explicit Euler; the frequency is refreshed from the
current profile before every step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .functionals import (
    QBallDiagnostics,
    diagnose,
    hylomorphy_sigma,
    omega_from_charge,
)
from .grid import RadialGrid, RadialProfile, integrate_radial, radial_laplacian
from .potentials import PotentialSpec, require_normalized

__all__ = [
    "FlowConfig",
    "FlowInstabilityError",
    "QBallSolution",
    "initial_guess",
    "flow_step",
    "static_residual",
    "detect_boundary_artifact",
    "minimize",
    "stable_dt",
]

log = logging.getLogger(__name__)


class FlowInstabilityError(RuntimeError):
    """The explicit update produced non-finite values; reduce dt."""


@dataclass(frozen=True)
class FlowConfig:
    """Settings of one minimization.

    ``dt=None`` means ``dt_factor`` times the stability limit h^2 / n
    (0.4 h^2 in two dimensions).  Stopping needs the per-step
    relative changes of omega and of the ratio below ``e_omega`` and
    ``e_lambda`` *and* the static residual below ``residual_tol``.
    """

    dt: float | None = None
    dt_factor: float = 0.8
    e_omega: float = 1e-8
    e_lambda: float = 1e-10
    residual_tol: float = 1e-5
    tail_tol: float = 1e-6
    max_steps: int = 5_000_000
    check_every: int = 1000
    guess: str = "gaussian"
    guess_width: float | None = None
    guess_radius: float = 5.0
    guess_amplitude: float | None = None
    guess_omega: float = 0.8
    max_extensions: int = 3
    extension_factor: float = 1.5
    artifact_exit: bool = True
    artifact_exit_tail: float = 1e-3

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.dt_factor > 0:
            raise ValueError("dt_factor must be positive")
        for name in ("e_omega", "e_lambda", "residual_tol", "tail_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.max_steps < 1 or self.check_every < 1:
            raise ValueError("max_steps and check_every must be >= 1")
        if self.guess not in ("gaussian", "plateau"):
            raise ValueError(f"guess must be 'gaussian' or 'plateau', got {self.guess!r}")
        if not 0.0 < self.guess_omega:
            raise ValueError("guess_omega must be positive")
        if self.max_extensions < 0 or not self.extension_factor > 1.0:
            raise ValueError("bad domain-extension settings")

    def time_step(self, grid: RadialGrid) -> float:
        return self.dt if self.dt is not None else self.dt_factor * stable_dt(grid)


def stable_dt(grid: RadialGrid) -> float:
    """Euler stability limit h^2 / n; the origin stencil 2n/h^2 is the stiffest row."""
    return grid.h**2 / grid.n


@dataclass
class QBallSolution:
    profile: RadialProfile
    omega: float
    sigma: float
    diagnostics: QBallDiagnostics
    converged: bool
    steps: int
    lambda_history: list = field(default_factory=list)
    stopped_by_tolerance: bool = False
    spread_exit: bool = False
    static_residual: float = math.nan
    boundary_artifact: bool = False
    nonphysical: bool = False
    extensions: int = 0
    potential: str = ""

    @property
    def hylomorphic(self) -> bool:
        """Converged to a genuine soliton with Lambda < 1."""
        return self.converged and self.diagnostics.Lambda < 1.0

    @property
    def grid(self) -> RadialGrid:
        return self.profile.grid

    def summary(self) -> dict:
        d = self.diagnostics.as_dict()
        d.update(
            sigma=self.sigma,
            converged=self.converged,
            steps=self.steps,
            static_residual=self.static_residual,
            boundary_artifact=self.boundary_artifact,
            nonphysical=self.nonphysical,
            extensions=self.extensions,
            r_max=self.grid.r_max,
            M=self.grid.M,
        )
        return d


def initial_guess(config: FlowConfig, grid: RadialGrid, sigma: float) -> RadialProfile:
    """Gaussian bump or discontinuous plateau carrying charge sigma.

    The amplitude is chosen so that the frequency slaved to the charge
    starts at ``config.guess_omega`` unless an amplitude is given.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    r = grid.r
    if config.guess == "plateau":
        radius = config.guess_radius
        if not 0 < radius < grid.r_max:
            raise ValueError(f"plateau radius must lie in (0, r_max={grid.r_max}), got {radius}")
        shape = (r < radius).astype(float)
    else:
        width = config.guess_width
        if width is None:
            # unit amplitude at the starting frequency, capped to the domain
            base = integrate_radial(grid, np.exp(-2.0 * r**2))
            width = min((sigma / (config.guess_omega * base)) ** (1.0 / grid.n), grid.r_max / 4.0)
        shape = np.exp(-((r / width) ** 2))
    shape[-1] = 0.0
    norm = integrate_radial(grid, shape**2)
    if config.guess_amplitude is not None:
        amp = config.guess_amplitude
    else:
        amp = math.sqrt(sigma / (config.guess_omega * norm))
    return RadialProfile(grid, amp * shape)


def static_residual(u: RadialProfile, omega: float, p: PotentialSpec) -> float:
    """sup |lap u - W'(u) + omega^2 u| / sup |u| over the free nodes."""
    v = u.values
    res = radial_laplacian(u) - p.dW_signed(v) + omega**2 * v
    scale = np.max(np.abs(v))
    return float(np.max(np.abs(res[:-1])) / scale) if scale > 0 else math.inf


def _check_dt(dt, grid):
    limit = stable_dt(grid)
    if dt > limit * (1.0 + 1e-9):
        raise FlowInstabilityError(
            f"dt={dt:.3g} exceeds the explicit stability limit h^2/n={limit:.3g}; reduce dt"
        )


def flow_step(u: RadialProfile, sigma: float, p: PotentialSpec, dt: float) -> RadialProfile:
    """One explicit Euler step of the charge-slaved flow."""
    _check_dt(dt, u.grid)
    omega = omega_from_charge(u, sigma)
    v = u.values
    new = v + dt * (radial_laplacian(u) - p.dW_signed(v) + omega**2 * v)
    new[-1] = 0.0
    # below the stability limit one step changes sup|u| by at most ~3x
    if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > 10.0 * np.max(np.abs(v)):
        raise FlowInstabilityError(
            f"flow step is unstable at dt={dt:.3g}; reduce it below {stable_dt(u.grid):.3g}"
        )
    return RadialProfile(u.grid, new)


def detect_boundary_artifact(u: RadialProfile, tail_tol: float) -> bool:
    """True if |u| on the outer 10% of the domain exceeds tail_tol * sup |u|."""
    v = np.abs(u.values)
    k = int(math.floor(0.9 * u.grid.M))
    return bool(np.max(v[k:]) > tail_tol * np.max(v))


def _run_chunks(u, sigma, p, dt, config, history, step0, budget):
    """Iterate compiled chunks until the stopping rule or the step budget."""
    g = u.grid
    kinds, coeffs, powers = p.arrays
    values = u.values.copy()
    steps = step0
    lam_prev = hylomorphy_sigma(u, sigma, p)
    history.append((steps, lam_prev))
    stopped = False
    spread = False
    blowup = 10.0 * max(1.0, float(np.max(np.abs(values))))
    while steps - step0 < budget:
        chunk = min(config.check_every, budget - (steps - step0))
        w_before, w_after = _kernels.flow_steps(
            values, chunk, dt, g.h, g.n, sigma, g.weights, kinds, coeffs, powers
        )
        steps += chunk
        if not math.isfinite(w_after) or np.max(np.abs(values)) > 1e3 * blowup:
            raise FlowInstabilityError(
                f"flow diverged after {steps} steps; reduce dt below {stable_dt(g):.3g} (now {dt:.3g})"
            )
        prof = RadialProfile(g, values.copy())
        lam = hylomorphy_sigma(prof, sigma, p)
        history.append((steps, lam))
        d_omega = abs(w_after - w_before) / w_before
        d_lam = abs(lam - lam_prev) / (chunk * abs(lam))
        lam_prev = lam
        if d_omega < config.e_omega and d_lam < config.e_lambda:
            if static_residual(prof, w_after, p) < config.residual_tol:
                stopped = True
                break
        # omega >= 1 leaves no decaying far field: once such a profile has
        # spread onto the wall it is relaxing to the Dirichlet mode
        if config.artifact_exit and w_after >= 1.0:
            if detect_boundary_artifact(prof, config.artifact_exit_tail):
                spread = True
                break
    return RadialProfile(g, values), steps, stopped, spread


def _pad(u: RadialProfile, grid: RadialGrid) -> RadialProfile:
    v = np.zeros(grid.points)
    v[: u.grid.points] = u.values
    return RadialProfile(grid, v)


def minimize(
    config: FlowConfig,
    p: PotentialSpec,
    sigma: float,
    grid: RadialGrid,
    start: RadialProfile | None = None,
) -> QBallSolution:
    """Minimize the charge-reduced ratio at charge sigma by gradient flow.

    Non-convergence is reported through ``converged=False`` rather than an
    exception.  When a converged profile looks like a genuine soliton
    (omega < 1, Lambda < 1) but still touches the outer boundary, the
    domain is enlarged at fixed spacing and the flow resumed, up to
    ``config.max_extensions`` times.  A profile that keeps touching the
    boundary, or spreads onto it with omega >= 1, is flagged as the
    Dirichlet artifact.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    require_normalized(p)
    if start is None:
        u = initial_guess(config, grid, sigma)
    else:
        u = _pad(start, grid) if start.grid.points < grid.points else start
        if u.grid != grid:
            u = RadialProfile(grid, np.interp(grid.r, start.r, start.values, right=0.0))
    dt = config.time_step(grid)
    _check_dt(dt, grid)
    history: list = []
    steps = 0
    extensions = 0
    while True:
        u, steps, stopped, spread = _run_chunks(
            u, sigma, p, dt, config, history, steps, config.max_steps - steps
        )
        omega = omega_from_charge(u, sigma)
        artifact = spread or detect_boundary_artifact(u, config.tail_tol)
        if not artifact or spread or extensions >= config.max_extensions:
            break
        if steps >= config.max_steps or not omega < 1.0:
            break
        extensions += 1
        bigger = u.grid.extended(config.extension_factor)
        log.info("sigma=%g: soliton tail reaches r_max=%g, extending to %g", sigma, u.grid.r_max, bigger.r_max)
        u = _pad(u, bigger)
    res = static_residual(u, omega, p)
    diag = diagnose(u, omega, p)
    nonphysical = diag.min_value < -config.residual_tol * diag.sup_norm
    converged = stopped and not artifact and res < config.residual_tol and not nonphysical
    return QBallSolution(
        profile=u,
        omega=omega,
        sigma=float(sigma),
        diagnostics=diag,
        converged=converged,
        steps=steps,
        lambda_history=history,
        stopped_by_tolerance=stopped,
        spread_exit=spread,
        static_residual=res,
        boundary_artifact=artifact,
        nonphysical=nonphysical,
        extensions=extensions,
        potential=p.label,
    )


def with_overrides(config: FlowConfig, **kw) -> FlowConfig:
    return replace(config, **kw)
