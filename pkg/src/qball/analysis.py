"""Checks of the standing-wave theory on computed solitons, charge sweeps,
minimum-charge detection and the alpha/beta/gamma classification of
nonlinearities.

Classification is evidence from a finite sweep, never a proof: the type
definitions quantify over all solitons.  The report carries the measured
trends together with the analytic sufficient conditions read off N(s).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .flow import FlowConfig, QBallSolution, minimize
from .functionals import gamma_ratio, hylomorphy, pohozaev_residual
from .grid import RadialGrid, RadialProfile
from .potentials import PotentialSpec, beta_bound

__all__ = [
    "TheoryViolationError",
    "BracketError",
    "pohozaev_residual",
    "FrequencyWindow",
    "frequency_window",
    "check_frequency_window",
    "consistency_lambda",
    "SweepResult",
    "sweep_charges",
    "ThresholdResult",
    "find_min_charge",
    "alpha_bound",
    "ClassificationReport",
    "classify",
    "FIG2_CHARGES",
]

log = logging.getLogger(__name__)

FIG2_CHARGES = (5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400, 500)


class TheoryViolationError(AssertionError):
    """A converged soliton contradicts a theorem; signals a numerics bug."""


class BracketError(ValueError):
    """The charge interval does not bracket the existence threshold."""


@dataclass(frozen=True)
class FrequencyWindow:
    omega_lo: float
    omega_hi: float
    gamma_ok: bool

    def contains(self, omega: float) -> bool:
        return self.gamma_ok and self.omega_lo < omega < self.omega_hi


def frequency_window(Gamma: float, n: int, lambda0: float) -> FrequencyWindow:
    """Admissible frequency interval of a hylomorphic soliton with gradient ratio Gamma.

    omega lies in (max{1 - sqrt(1 - lambda0), 1/2 - d/2}, 1/2 + d/2) with
    d = sqrt(1 - 4 Gamma / n); the interval is empty when Gamma > n/4.
    """
    disc = 1.0 - 4.0 * Gamma / n
    if disc < 0.0:
        return FrequencyWindow(math.nan, math.nan, False)
    d = math.sqrt(disc)
    lo = max(1.0 - math.sqrt(max(0.0, 1.0 - lambda0)), 0.5 - 0.5 * d)
    return FrequencyWindow(lo, 0.5 + 0.5 * d, Gamma < n / 4.0)


def check_frequency_window(sol: QBallSolution, lambda0: float) -> FrequencyWindow:
    """Assert the admissible-frequency theorem on a converged hylomorphic soliton."""
    n = sol.grid.n
    Gamma = gamma_ratio(sol.profile)
    win = frequency_window(Gamma, n, lambda0)
    if not win.gamma_ok:
        raise TheoryViolationError(f"sigma={sol.sigma:g}: Gamma={Gamma:.6g} >= n/4={n / 4:g}")
    if not win.contains(sol.omega):
        raise TheoryViolationError(
            f"sigma={sol.sigma:g}: omega={sol.omega:.8g} outside ({win.omega_lo:.8g}, {win.omega_hi:.8g})"
        )
    if not 0.5 * lambda0 < sol.omega < 1.0:
        raise TheoryViolationError(f"sigma={sol.sigma:g}: omega={sol.omega:.8g} outside (lambda0/2, 1)")
    return win


def consistency_lambda(u: RadialProfile, omega: float, p: PotentialSpec) -> float:
    """|Lambda(u, omega) - (Gamma/(n omega) + omega)|, zero at critical points."""
    n = u.grid.n
    return abs(hylomorphy(u, omega, p) - (gamma_ratio(u) / (n * omega) + omega))


# --------------------------------------------------------------------------
# charge sweeps


@dataclass
class SweepResult:
    potential: str
    charge_grid: tuple[float, ...]
    entries: list[tuple[float, QBallSolution]] = field(default_factory=list)

    def converged(self) -> list[tuple[float, QBallSolution]]:
        return [(s, q) for s, q in self.entries if q.converged]

    def hylomorphic(self) -> list[tuple[float, QBallSolution]]:
        return [(s, q) for s, q in self.entries if q.hylomorphic]

    def column(self, name: str, only_converged: bool = True) -> np.ndarray:
        rows = self.converged() if only_converged else self.entries
        return np.array([getattr(q.diagnostics, name) for _, q in rows])

    def sigmas(self, only_converged: bool = True) -> np.ndarray:
        rows = self.converged() if only_converged else self.entries
        return np.array([s for s, _ in rows])

    def rows(self) -> list[dict]:
        out = []
        for s, q in self.entries:
            d = q.diagnostics
            out.append(
                {
                    "sigma": s,
                    "omega": d.omega,
                    "Lambda": d.Lambda,
                    "E": d.E,
                    "H": d.H,
                    "Gamma": d.Gamma,
                    "alpha": d.alpha,
                    "sup_norm": d.sup_norm,
                    "pohozaev_residual": d.pohozaev_residual,
                    "converged": int(q.converged),
                }
            )
        return out


def _rescaled(sol: QBallSolution, sigma: float) -> RadialProfile:
    # same omega, charge scaled to sigma
    c = math.sqrt(sigma / sol.sigma)
    return RadialProfile(sol.grid, c * sol.profile.values)


def _solve_one(args):
    config, p, sigma, grid = args
    return minimize(config, p, sigma, grid)


def sweep_charges(
    p: PotentialSpec,
    sigmas,
    config: FlowConfig,
    grid: RadialGrid,
    warm_start: bool = True,
    jobs: int = 1,
) -> SweepResult:
    """One minimization per charge, in increasing order.

    With ``warm_start`` each run starts from the previous converged profile
    rescaled to the new charge, which forces sequential execution; cold
    sweeps can fan out over ``jobs`` worker processes.
    """
    sig = [float(s) for s in sigmas]
    if any(not s > 0 for s in sig):
        raise ValueError("charges must be positive")
    if any(b <= a for a, b in zip(sig, sig[1:])):
        raise ValueError("charges must be strictly increasing")
    result = SweepResult(p.label, tuple(sig))
    if not warm_start and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            sols = list(pool.map(_solve_one, [(config, p, s, grid) for s in sig]))
        result.entries = list(zip(sig, sols))
        return result
    prev = None
    for s in sig:
        start = _rescaled(prev, s) if (warm_start and prev is not None) else None
        sol = minimize(config, p, s, grid, start=start)
        log.info(
            "%s sigma=%g omega=%.6f Lambda=%.6f converged=%s",
            p.label, s, sol.omega, sol.diagnostics.Lambda, sol.converged,
        )
        result.entries.append((s, sol))
        if sol.converged:
            prev = sol
    return result


# --------------------------------------------------------------------------
# existence threshold


@dataclass(frozen=True)
class ThresholdResult:
    bracket: tuple[float, float] | None
    none_found: bool
    sigma_lo: float
    evaluations: tuple[tuple[float, bool], ...]

    @property
    def estimate(self) -> float | None:
        return None if self.bracket is None else 0.5 * (self.bracket[0] + self.bracket[1])

    def describe(self) -> str:
        if self.none_found:
            return f"none found >= {self.sigma_lo:g}"
        lo, hi = self.bracket
        return f"threshold in [{lo:g}, {hi:g}]"


def find_min_charge(
    p: PotentialSpec,
    config: FlowConfig,
    grid: RadialGrid,
    sigma_lo: float,
    sigma_hi: float,
    tol: float = 1.0,
) -> ThresholdResult:
    """Bisect on the convergence outcome for the smallest charge carrying a soliton.

    A charge "fails" when the flow ends on the Dirichlet artifact (or does
    not converge).  If ``sigma_lo`` already converges, no threshold exists
    above it and ``none_found`` is set.
    """
    if not 0 < sigma_lo < sigma_hi:
        raise BracketError(f"need 0 < sigma_lo < sigma_hi, got [{sigma_lo}, {sigma_hi}]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    evals = []

    def ok(s):
        sol = minimize(config, p, s, grid)
        evals.append((s, sol.converged))
        log.info("threshold probe sigma=%g converged=%s", s, sol.converged)
        return sol.converged

    if ok(sigma_lo):
        return ThresholdResult(None, True, sigma_lo, tuple(evals))
    if not ok(sigma_hi):
        raise BracketError(f"no soliton at sigma_hi={sigma_hi:g}; widen the bracket")
    lo, hi = sigma_lo, sigma_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult((lo, hi), False, sigma_lo, tuple(evals))


# --------------------------------------------------------------------------
# classification


def alpha_bound(p: PotentialSpec, s_max: float = 1e3, samples: int = 20001) -> float:
    """Largest a with N > 0 on (0, a); 0 when N is negative near the origin."""
    s = np.geomspace(1e-6, s_max, samples)
    neg = np.flatnonzero(p.N(s) < 0)
    if neg.size == 0:
        return math.inf
    k = neg[0]
    if k == 0:
        return 0.0
    return float(optimize.brentq(p.N, s[k - 1], s[k], xtol=1e-14))


@dataclass
class ClassificationReport:
    potential: str
    min_charge_threshold: str
    sup_norm_trend: list[tuple[float, float]]
    type_alpha: str
    type_beta: str
    alpha0_analytic: float
    beta0_analytic: float
    evidence: dict = field(default_factory=dict)

    @property
    def type_gamma(self) -> bool:
        return self.type_alpha == "non-alpha" and self.type_beta == "non-beta"

    @property
    def label(self) -> str:
        if self.type_gamma:
            return "gamma"
        return f"({self.type_alpha}, {self.type_beta})"


def classify(
    p: PotentialSpec,
    sweep: SweepResult,
    threshold: ThresholdResult | None = None,
    beta_slack: float = 0.05,
) -> ClassificationReport:
    """Evidence-based alpha/beta labels from a charge sweep.

    alpha      a positive existence threshold and sup norms that stay away
               from zero (not below the analytic bound where N > 0)
    non-alpha  solitons down to the smallest charge with sup norms that
               decline as the charge shrinks
    beta       sup norms that level off below the analytic bound beyond
               which N' >= 0
    non-beta   no such bound and sup norms still growing at the top charges
    """
    conv = sweep.converged()
    sig = np.array([s for s, _ in conv])
    sup = np.array([q.diagnostics.sup_norm for _, q in conv])
    if sig.size >= 2 and sig[-1] / sig[0] < 10.0:
        raise ValueError("classification needs a sweep spanning at least one decade of charge")
    a0 = alpha_bound(p)
    b0 = beta_bound(p)
    ev: dict = {"alpha0_analytic": a0, "beta0_analytic": b0}
    failed_below = [s for s, q in sweep.entries if not q.converged and (sig.size and s < sig[0])]

    if threshold is not None and not threshold.none_found:
        thr = threshold.describe()
    elif threshold is not None:
        thr = threshold.describe()
    elif failed_below:
        thr = f"threshold in [{max(failed_below):g}, {sig[0]:g}]"
    else:
        thr = f"none found >= {sweep.charge_grid[0]:g}"
    has_threshold = not thr.startswith("none")

    if sig.size < 3:
        return ClassificationReport(
            p.label, thr, list(zip(sig.tolist(), sup.tolist())), "inconclusive", "inconclusive", a0, b0,
            {"reason": "fewer than three converged solitons"},
        )

    # alpha / non-alpha from the low-charge end
    low = sup[: max(3, sig.size // 2)]
    declining = bool(np.all(np.diff(low) > 0)) and sup[0] < 0.5 * np.median(sup)
    if has_threshold and a0 > 0 and sup.min() >= min(a0, 0.5 * sup.max()):
        type_alpha = "alpha"
        ev["alpha"] = f"{thr}; min sup norm {sup.min():.4g} stays above {min(a0, 0.5 * sup.max()):.4g}"
    elif not has_threshold and declining:
        type_alpha = "non-alpha"
        ev["alpha"] = (
            f"solitons down to sigma={sig[0]:g} with sup norm {sup[0]:.4g} "
            f"declining toward small charge (median {np.median(sup):.4g})"
        )
    else:
        type_alpha = "inconclusive"
        ev["alpha"] = f"threshold: {thr}; low-charge sup norms {np.round(low, 4).tolist()}"

    # beta / non-beta from the high-charge end
    top = sup[-3:]
    growth = top[-1] / top[0] - 1.0
    if math.isfinite(b0) and sup.max() <= b0 * (1.0 + beta_slack) and growth < 0.1:
        type_beta = "beta"
        ev["beta"] = f"max sup norm {sup.max():.4g} <= beta0={b0:.4g} (+{beta_slack:.0%}), top growth {growth:.2%}"
    elif not math.isfinite(b0) and bool(np.all(np.diff(top) > 0)) and growth >= 0.1:
        type_beta = "non-beta"
        ev["beta"] = f"N' < 0 at large s; sup norm still growing {top.round(4).tolist()} at the top charges"
    else:
        type_beta = "inconclusive"
        ev["beta"] = f"beta0={b0:.4g}; top sup norms {top.round(4).tolist()}"

    return ClassificationReport(
        p.label, thr, list(zip(sig.tolist(), sup.tolist())), type_alpha, type_beta, a0, b0, ev
    )
