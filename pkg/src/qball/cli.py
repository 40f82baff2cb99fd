"""Command-line front end: ``qball {solve,sweep,classify,boost,evolve,lambda0}``.

Values come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags; the manifest records which
source won for every key.  Exit codes: 0 success, 2 configuration error,
3 non-convergence (``solve --strict``), 4 numerical failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    FIG2_CHARGES,
    BracketError,
    TheoryViolationError,
    alpha_bound,
    check_frequency_window,
    classify,
    find_min_charge,
    sweep_charges,
)
from .boost import (
    BoostError,
    ResolutionError,
    barycenter,
    half_max_widths,
    make_boost,
    pde_residual,
    sample_boosted,
)
from .evolve import MAX_PERIODS, MAX_PERTURBATION, EvolutionBlowupError, stability_run
from .flow import FlowConfig, FlowInstabilityError, QBallSolution, minimize
from .functionals import densities
from .grid import integrate_radial, make_grid
from .io import write_csv, write_manifest, write_rows
from .potentials import DomainError, InvalidPotentialError, beta_bound, lambda0, parse_potential

__all__ = ["ConfigError", "RunConfig", "KEYS", "parse_config", "run", "main", "figure_recipes", "OUTPUT_ENV"]

log = logging.getLogger("qball")

OUTPUT_ENV = "QBALL_OUTPUT_DIR"
SUBCOMMANDS = ("solve", "sweep", "classify", "boost", "evolve", "lambda0")

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5


class ConfigError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return float(text)


@dataclass(frozen=True)
class Key:
    kind: object
    default: object
    commands: tuple
    help: str


FLOW = ("solve", "sweep", "classify", "boost", "evolve")
_ALL = SUBCOMMANDS

# every key accepted in a config file or as --flag (dashes or underscores)
KEYS: dict[str, Key] = {
    "potential": Key(str, "gamma", _ALL, "alpha_beta[:a=A] | alpha_nonbeta | nonalpha_beta[:a=A] | gamma | custom:EXPR"),
    "n": Key(int, 2, FLOW, "spatial dimension"),
    "r_max": Key(float, 40.0, FLOW, "outer radius of the radial grid"),
    "M": Key(int, 2000, FLOW, "number of grid intervals"),
    "dt": Key(_opt_float, None, FLOW, "flow time step (default dt_factor * h^2/n)"),
    "dt_factor": Key(float, 0.8, FLOW, "flow time step as a fraction of the stability limit"),
    "e_omega": Key(float, 1e-8, FLOW, "per-step relative omega change to stop"),
    "e_lambda": Key(float, 1e-10, FLOW, "per-step relative ratio change to stop"),
    "residual_tol": Key(float, 1e-5, FLOW, "static-equation residual to accept a soliton"),
    "tail_tol": Key(float, 1e-6, FLOW, "boundary-tail level flagging the Dirichlet artifact"),
    "max_steps": Key(int, 5_000_000, FLOW, "flow step budget per charge"),
    "check_every": Key(int, 1000, FLOW, "flow steps between convergence checks"),
    "guess": Key(str, "gaussian", FLOW, "initial guess: gaussian | plateau"),
    "guess_width": Key(_opt_float, None, FLOW, "gaussian width (default: unit amplitude)"),
    "guess_radius": Key(float, 5.0, FLOW, "plateau radius"),
    "max_extensions": Key(int, 3, FLOW, "domain enlargements when a soliton tail reaches r_max"),
    "charge": Key(float, 300.0, ("solve", "boost", "evolve"), "hylomorphic charge sigma"),
    "charges": Key(_floats, list(FIG2_CHARGES), ("sweep", "classify"), "comma-separated increasing charges"),
    "cold": Key(_bool, False, ("sweep", "classify"), "cold-start every charge instead of warm-starting"),
    "jobs": Key(int, 1, ("sweep", "classify"), "worker processes for cold sweeps"),
    "profiles": Key(_bool, False, ("sweep", "classify"), "also write one profile CSV per converged charge"),
    "sigma_lo": Key(float, 5.0, ("classify",), "lower end of the threshold bracket"),
    "sigma_hi": Key(float, 100.0, ("classify",), "upper end of the threshold bracket"),
    "threshold_tol": Key(float, 1.0, ("classify",), "bracket width at which bisection stops"),
    "v": Key(_floats, [0.9, 0.0], ("boost",), "velocity vector v1,v2 with |v| < 1"),
    "t": Key(float, 0.0, ("boost",), "sampling time"),
    "t2": Key(float, 5.0, ("boost",), "second time for the barycenter drift"),
    "extent": Key(_floats, [20.0, 16.0], ("boost",), "box half-widths L1,L2"),
    "spacing": Key(float, 0.05, ("boost",), "Cartesian sample spacing"),
    "perturbation": Key(float, 0.0, ("evolve",), "relative amplitude of the initial radial bump"),
    "periods": Key(float, 50.0, ("evolve",), "evolution length in periods 2 pi/omega"),
    "evolve_dt": Key(_opt_float, None, ("evolve",), "evolution time step (default half the CFL limit)"),
    "strict": Key(_bool, False, ("solve",), "exit 3 when the flow does not converge"),
    "output_dir": Key(str, None, _ALL, f"output directory (default ${OUTPUT_ENV} or ./qball-out/<command>)"),
}


@dataclass
class RunConfig:
    subcommand: str
    values: dict
    provenance: dict = field(default_factory=dict)
    verbose: bool = False

    def __getitem__(self, key):
        return self.values[key]

    @property
    def output_dir(self) -> Path:
        return Path(self.values["output_dir"])

    def flow_config(self) -> FlowConfig:
        v = self.values
        return FlowConfig(
            dt=v["dt"],
            dt_factor=v["dt_factor"],
            e_omega=v["e_omega"],
            e_lambda=v["e_lambda"],
            residual_tol=v["residual_tol"],
            tail_tol=v["tail_tol"],
            max_steps=v["max_steps"],
            check_every=v["check_every"],
            guess=v["guess"],
            guess_width=v["guess_width"],
            guess_radius=v["guess_radius"],
            max_extensions=v["max_extensions"],
        )

    def grid(self):
        return make_grid(self.values["n"], self.values["r_max"], self.values["M"])

    def potential(self):
        return parse_potential(self.values["potential"])


def read_config_file(path) -> dict:
    """``key = value`` per line, ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


# alternative spellings of some flags
ALIASES = {
    "n": ["--dim"],
    "r_max": ["--rmax"],
    "M": ["--nodes"],
    "e_omega": ["--tol-omega"],
    "e_lambda": ["--tol-lambda"],
    "v": ["--v"],
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qball", description="Q-ball construction and verification toolkit")
    ap.add_argument("--version", action="version", version=f"qball {__version__}")
    ap.add_argument("--recipes", action="store_true", help="print the figure-data recipes and exit")
    sub = ap.add_subparsers(dest="subcommand")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("-v", "--verbose", action="store_true")
        for key, spec in KEYS.items():
            if name not in spec.commands:
                continue
            flag = "--velocity" if key == "v" else "--" + key.replace("_", "-")
            names = [flag] + ALIASES.get(key, [])
            if spec.kind is _bool:
                sp.add_argument(*names, dest=key, nargs="?", const="true", default=argparse.SUPPRESS, help=spec.help)
            else:
                sp.add_argument(*names, dest=key, default=argparse.SUPPRESS, help=spec.help)
    return ap


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    try:
        cfg.potential()
        if cfg.subcommand in FLOW:
            cfg.flow_config()
            cfg.grid()
    except (ValueError, DomainError, InvalidPotentialError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.provenance.get("dt") not in (None, "default") and cfg.provenance.get("dt_factor") not in (None, "default"):
        raise ConfigError("dt and dt_factor both given; set only one")
    sub = cfg.subcommand
    if sub in ("solve", "boost", "evolve") and not v["charge"] > 0:
        raise ConfigError(f"charge must be positive, got {v['charge']:g}")
    if sub in ("sweep", "classify"):
        ch = v["charges"]
        if not ch or any(not c > 0 for c in ch):
            raise ConfigError("charges must be a non-empty list of positive values")
        if any(b <= a for a, b in zip(ch, ch[1:])):
            raise ConfigError("charges must be strictly increasing")
        if v["jobs"] < 1:
            raise ConfigError("jobs must be >= 1")
        if v["jobs"] > 1 and not v["cold"]:
            raise ConfigError("jobs > 1 needs cold = true (warm-started sweeps are sequential)")
    if sub == "classify":
        if not 0 < v["sigma_lo"] < v["sigma_hi"]:
            raise ConfigError(f"need 0 < sigma_lo < sigma_hi, got {v['sigma_lo']:g}, {v['sigma_hi']:g}")
        if not v["threshold_tol"] > 0:
            raise ConfigError("threshold_tol must be positive")
    if sub == "boost":
        if len(v["v"]) != 2 or len(v["extent"]) != 2:
            raise ConfigError("v and extent take two comma-separated numbers")
        if not math.hypot(*v["v"]) < 1:
            raise ConfigError(f"|v| must be < 1, got {math.hypot(*v['v']):g}")
        if not (min(v["extent"]) > 0 and v["spacing"] > 0):
            raise ConfigError("extent and spacing must be positive")
        if v["spacing"] > min(v["extent"]) / 4:
            raise ConfigError("spacing is too coarse for the box")
    if sub == "evolve":
        if not abs(v["perturbation"]) <= MAX_PERTURBATION:
            raise ConfigError(f"|perturbation| must be <= {MAX_PERTURBATION}")
        if not 0 < v["periods"] <= MAX_PERIODS:
            raise ConfigError(f"periods must lie in (0, {MAX_PERIODS}]")
        if v["evolve_dt"] is not None and not v["evolve_dt"] > 0:
            raise ConfigError("evolve_dt must be positive")


def parse_config(argv=None, env=None) -> RunConfig:
    """Resolve defaults < config file < flags into a validated RunConfig."""
    env = os.environ if env is None else env
    ap = _build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("invalid command line") from exc
    if ns.subcommand is None:
        raise ConfigError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
    sub = ns.subcommand
    raw, prov = {}, {}
    for key, spec in KEYS.items():
        if sub in spec.commands:
            raw[key], prov[key] = spec.default, "default"
    if ns.config:
        for key, value in read_config_file(ns.config).items():
            if sub not in KEYS[key].commands:
                log.warning("config key %r is not used by %s; ignored", key, sub)
                continue
            raw[key], prov[key] = value, "file"
    for key in list(raw):
        if hasattr(ns, key):
            raw[key], prov[key] = getattr(ns, key), "flag"
    values = {}
    for key, value in raw.items():
        kind = KEYS[key].kind
        try:
            values[key] = value if (value is None or prov[key] == "default") else kind(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    if values.get("output_dir") is None:
        base = env.get(OUTPUT_ENV)
        values["output_dir"] = str(Path(base) if base else Path("qball-out") / sub)
        prov["output_dir"] = "env" if base else "default"
    cfg = RunConfig(sub, values, prov, bool(getattr(ns, "verbose", False)))
    _validate(cfg)
    return cfg


# --------------------------------------------------------------------------
# subcommands


def _profile_columns(sol: QBallSolution, p):
    d = densities(sol.profile, sol.omega, p)
    return {"r": d.r, "u": sol.profile.values, "rho_E": d.rho_E, "rho_H": d.rho_H, "rho_B": d.rho_B}


def _soliton_checks(sol: QBallSolution, p, lam0: float) -> dict:
    """Runtime theorem checks on a converged hylomorphic soliton."""
    d = densities(sol.profile, sol.omega, p)
    out = {"rho_B_support": [list(s) for s in d.support]}
    if sol.hylomorphic:
        win = check_frequency_window(sol, lam0)
        bound = abs(sol.diagnostics.H) * (1.0 - sol.diagnostics.Lambda)
        rho_b = integrate_radial(sol.grid, d.rho_B)
        if not d.support_nonempty or rho_b < bound - 1e-6 * abs(sol.diagnostics.H):
            raise TheoryViolationError(f"binding-energy support check failed at sigma={sol.sigma:g}")
        out.update(omega_window=[win.omega_lo, win.omega_hi], binding_energy=rho_b, binding_bound=bound)
    return out


def _cmd_solve(cfg, p, files, diag):
    sol = minimize(cfg.flow_config(), p, cfg["charge"], cfg.grid())
    files.append(write_csv(cfg.output_dir / "profile.csv", _profile_columns(sol, p)))
    diag["solution"] = sol.summary()
    if sol.converged:
        diag["checks"] = _soliton_checks(sol, p, lambda0(p).lambda0)
    _print_solution(sol)
    if cfg["strict"] and not sol.converged:
        print("not converged", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _print_solution(sol):
    d = sol.diagnostics
    status = "converged" if sol.converged else ("dirichlet artifact" if sol.boundary_artifact else "not converged")
    print(
        f"sigma={sol.sigma:g} {status}  omega={d.omega:.8f}  Lambda={d.Lambda:.8f}  E={d.E:.8g}  "
        f"Gamma={d.Gamma:.6g}  sup={d.sup_norm:.6g}  pohozaev={d.pohozaev_residual:.3g}  steps={sol.steps}"
    )


def _sweep(cfg, p, files, diag):
    sw = sweep_charges(p, cfg["charges"], cfg.flow_config(), cfg.grid(), warm_start=not cfg["cold"], jobs=cfg["jobs"])
    files.append(write_rows(cfg.output_dir / "sweep.csv", sw.rows()))
    lam0 = lambda0(p).lambda0
    checks = {}
    for s, sol in sw.entries:
        _print_solution(sol)
        if sol.converged:
            checks[f"{s:g}"] = _soliton_checks(sol, p, lam0)
            if cfg["profiles"]:
                files.append(write_csv(cfg.output_dir / "profiles" / f"sigma_{s:g}.csv", _profile_columns(sol, p)))
    diag["checks"] = checks
    diag["converged"] = [s for s, _ in sw.converged()]
    return sw


def _cmd_sweep(cfg, p, files, diag):
    _sweep(cfg, p, files, diag)
    return EXIT_OK


def _cmd_classify(cfg, p, files, diag):
    threshold = None
    try:
        threshold = find_min_charge(p, cfg.flow_config(), cfg.grid(), cfg["sigma_lo"], cfg["sigma_hi"], cfg["threshold_tol"])
        diag["threshold"] = {"result": threshold.describe(), "evaluations": [list(e) for e in threshold.evaluations]}
    except BracketError as exc:
        diag["threshold"] = {"result": f"bracket error: {exc}"}
    print("threshold:", diag["threshold"]["result"])
    sw = _sweep(cfg, p, files, diag)
    rep = classify(p, sw, threshold)
    diag["classification"] = {
        "label": rep.label,
        "type_alpha": rep.type_alpha,
        "type_beta": rep.type_beta,
        "type_gamma": rep.type_gamma,
        "min_charge_threshold": rep.min_charge_threshold,
        "sup_norm_trend": rep.sup_norm_trend,
        "alpha0_analytic": rep.alpha0_analytic,
        "beta0_analytic": rep.beta0_analytic,
        "evidence": rep.evidence,
    }
    print(f"type: {rep.label}  alpha: {rep.type_alpha}  beta: {rep.type_beta}")
    for k, text in rep.evidence.items():
        if isinstance(text, str):
            print(f"  {k}: {text}")
    return EXIT_OK


def _cmd_boost(cfg, p, files, diag):
    sol = minimize(cfg.flow_config(), p, cfg["charge"], cfg.grid())
    _print_solution(sol)
    if not sol.converged:
        print("boost needs a converged soliton", file=sys.stderr)
        return EXIT_NOCONV
    b = make_boost(cfg["v"], sol.omega)
    ext, dx = cfg["extent"], cfg["spacing"]
    f = sample_boosted(sol.profile, b, cfg["t"], ext, dx)
    f2 = sample_boosted(sol.profile, b, cfg["t2"], ext, dx)
    X1, X2 = np.meshgrid(f.x1, f.x2, indexing="ij")
    files.append(
        write_csv(
            cfg.output_dir / "field.csv",
            {"x1": X1.ravel(), "x2": X2.ravel(), "re": f.values.real.ravel(), "im": f.values.imag.ravel(), "abs": f.modulus.ravel()},
        )
    )
    w_par, w_perp = half_max_widths(f)
    q1, q2 = barycenter(f), barycenter(f2)
    dt = cfg["t2"] - cfg["t"]
    summary = {
        "gamma": b.gamma,
        "omega": b.omega,
        "k": list(b.k),
        "v": list(b.v),
        "width_x1": w_par,
        "width_x2": w_perp,
        "width_ratio": w_perp / w_par if w_par > 0 else math.nan,
        "barycenter_t": [float(x) for x in q1],
        "barycenter_t2": [float(x) for x in q2],
        "drift_rate": [float(x) for x in (q2 - q1) / dt] if dt != 0 else None,
    }
    try:
        r1 = pde_residual(sol.profile, b, p, cfg["t"], ext, dx)
        r2 = pde_residual(sol.profile, b, p, cfg["t"], ext, 0.5 * dx)
        summary.update(pde_residual=r1, pde_residual_half=r2, pde_residual_ratio=r1 / r2)
    except ResolutionError as exc:
        summary["pde_residual"] = f"skipped: {exc}"
    diag["solution"] = sol.summary()
    diag["boost"] = summary
    for k, val in summary.items():
        print(f"{k} = {val}")
    return EXIT_OK


def _cmd_evolve(cfg, p, files, diag):
    sol = minimize(cfg.flow_config(), p, cfg["charge"], cfg.grid())
    _print_solution(sol)
    if not sol.converged:
        print("evolve needs a converged soliton", file=sys.stderr)
        return EXIT_NOCONV
    rep = stability_run(sol, None, p, cfg["perturbation"], periods=cfg["periods"], dt=cfg["evolve_dt"])
    led = rep.ledger
    files.append(
        write_csv(
            cfg.output_dir / "ledger.csv",
            {
                "t": [r.t for r in led],
                "E": [r.E for r in led],
                "H": [r.H for r in led],
                "deviation": [r.deviation for r in led],
                "localization_radius": [r.localization_radius for r in led],
            },
        )
    )
    diag["solution"] = sol.summary()
    diag["stability"] = rep.as_dict()
    for k, val in rep.as_dict().items():
        print(f"{k} = {val}")
    return EXIT_OK


def _cmd_lambda0(cfg, p, files, diag):
    lam = lambda0(p)
    diag["lambda0"] = {
        "lambda0": lam.lambda0,
        "argmin_s": lam.argmin_s,
        "at_infinity": lam.at_infinity,
        "alpha0_analytic": alpha_bound(p),
        "beta0_analytic": beta_bound(p),
    }
    where = "at infinity" if lam.at_infinity else f"at s = {lam.argmin_s:.10g}"
    print(f"{p.label}: lambda0 = {lam.lambda0:.12g} ({where})")
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "classify": _cmd_classify,
    "boost": _cmd_boost,
    "evolve": _cmd_evolve,
    "lambda0": _cmd_lambda0,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated config; writes data files plus manifest.json."""
    p = cfg.potential()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    files: list = []
    diag: dict = {}
    t0 = time.perf_counter()
    code = _COMMANDS[cfg.subcommand](cfg, p, files, diag)
    manifest = {
        "tool": "qball",
        "version": __version__,
        "subcommand": cfg.subcommand,
        "potential": {"label": p.label, "W": p.expression},
        "config": cfg.values,
        "provenance": cfg.provenance,
        "wall_time_s": time.perf_counter() - t0,
        "diagnostics": diag,
        "exit_code": code,
    }
    write_manifest(cfg.output_dir, manifest, files)
    return code


def figure_recipes() -> dict[str, list[list[str]]]:
    """One command per data file behind each published figure."""
    fig2 = ",".join(str(c) for c in FIG2_CHARGES)
    fig3 = {
        "alpha_beta:a=2.5": "30,100,300",
        "alpha_nonbeta": "30,100,300",
        "nonalpha_beta:a=1": "30,100,300",
        "gamma": "30,100,300",
    }
    return {
        "fig1": [["boost", "--potential", "gamma", "--charge", "300", "--v", "0.9,0", "--output-dir", "fig1"]],
        "fig2": [["sweep", "--potential", "gamma", "--charges", fig2, "--output-dir", "fig2"]],
        "fig3": [
            ["sweep", "--potential", pot, "--charges", ch, "--profiles", "--output-dir", f"fig3/{pot.split(':')[0]}"]
            for pot, ch in fig3.items()
        ],
        "fig4": [
            ["solve", "--potential", pot, "--charge", "100", "--output-dir", f"fig4/{pot.split(':')[0]}"]
            for pot in fig3
        ],
    }


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if "--recipes" in argv:
        for name, cmds in figure_recipes().items():
            for cmd in cmds:
                print(f"{name}: qball {' '.join(cmd)}")
        return EXIT_OK
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"qball: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING, format="%(message)s")
    try:
        return run(cfg)
    except (FlowInstabilityError, EvolutionBlowupError, TheoryViolationError) as exc:
        print(f"qball: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (BoostError, ValueError) as exc:
        print(f"qball: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"qball: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
