"""Nonlinearities W(s) of the Klein-Gordon field and their hylomorphy data.

A potential is a sum of basis terms in the field modulus ``s >= 0``::

    term = coeff * s^k | coeff * log(1+s) | coeff * log(1-s+s^2)
         | coeff * atan((2s-1)/sqrt(3)) | coeff

which is enough to write the four reference nonlinearities in closed form.
Every potential is expected to satisfy W(0) = W'(0) = 0, W''(0) = 1 and
W >= 0; :func:`check_normalization` measures how well it does.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize

from . import _kernels

__all__ = [
    "DomainError",
    "InvalidPotentialError",
    "Term",
    "PotentialSpec",
    "HylomorphyConstant",
    "NormalizationReport",
    "BUILTIN_NAMES",
    "builtin_potential",
    "custom_potential",
    "parse_terms",
    "parse_potential",
    "eval_W",
    "eval_dW",
    "eval_N",
    "eval_dN",
    "lambda0",
    "check_normalization",
    "beta_bound",
]

KIND_NAMES = {
    "power": _kernels.POWER,
    "log1p": _kernels.LOG1P,
    "logq": _kernels.LOGQ,
    "atan": _kernels.ATAN,
    "const": _kernels.CONST,
}


class DomainError(ValueError):
    """Raised when a potential is evaluated at a negative amplitude."""


class InvalidPotentialError(ValueError):
    """Raised when a potential fails the W(0)=W'(0)=0, W''(0)=1 normalization."""


@dataclass(frozen=True)
class Term:
    kind: str
    coeff: float
    power: float = 0.0

    def __post_init__(self):
        if self.kind not in KIND_NAMES:
            raise ValueError(f"unknown term kind {self.kind!r}")

    def __str__(self):
        c = repr(self.coeff)
        if self.kind == "power":
            return f"{c}*s^{self.power:g}"
        if self.kind == "log1p":
            return f"{c}*log(1+s)"
        if self.kind == "logq":
            return f"{c}*log(1-s+s^2)"
        if self.kind == "atan":
            return f"{c}*atan((2s-1)/sqrt(3))"
        return c


@dataclass(frozen=True)
class PotentialSpec:
    """A nonlinearity W(s) = 1/2 s^2 + N(s) on s >= 0, stored as basis terms."""

    name: str
    terms: tuple[Term, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kinds = np.array([KIND_NAMES[t.kind] for t in self.terms], dtype=np.int64)
        coeffs = np.array([t.coeff for t in self.terms], dtype=np.float64)
        powers = np.array([t.power for t in self.terms], dtype=np.float64)
        object.__setattr__(self, "_arrays", (kinds, coeffs, powers))

    @property
    def arrays(self):
        """(kinds, coeffs, powers) arrays consumed by the compiled kernels."""
        return self._arrays

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        extra = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.name}:{extra}"

    @property
    def expression(self) -> str:
        return " + ".join(str(t) for t in self.terms)

    def W(self, s):
        return _apply(_kernels.values, s, self.arrays)

    def dW(self, s):
        return _apply(_kernels.derivatives, s, self.arrays)

    def N(self, s):
        return self.W(s) - 0.5 * np.square(s)

    def dN(self, s):
        return self.dW(s) - np.asarray(s, dtype=float)

    def ddW0(self) -> float:
        """W''(0) from the closed-form term derivatives."""
        return float(_kernels.term_second_derivative_at_zero(*self.arrays))

    def W_signed(self, u):
        """W(|u|) for real fields that may transiently change sign."""
        return self.W(np.abs(u))

    def dW_signed(self, u):
        """Odd extension W'(|u|) sign(u) used by the real gradient flow."""
        u = np.asarray(u, dtype=float)
        return np.sign(u) * self.dW(np.abs(u))


def _apply(kernel, s, arrays):
    arr = np.asarray(s, dtype=np.float64)
    scalar = arr.ndim == 0
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = kernel(flat, *arrays).reshape(arr.shape)
    return float(out) if scalar else out


def _check_domain(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("potential is defined for amplitudes s >= 0 only")
    return arr


def eval_W(p: PotentialSpec, s):
    _check_domain(s)
    return p.W(s)


def eval_dW(p: PotentialSpec, s):
    _check_domain(s)
    return p.dW(s)


def eval_N(p: PotentialSpec, s):
    _check_domain(s)
    return p.N(s)


def eval_dN(p: PotentialSpec, s):
    _check_domain(s)
    return p.dN(s)


# --------------------------------------------------------------------------
# built-in nonlinearities

BUILTIN_NAMES = ("alpha_beta", "alpha_nonbeta", "nonalpha_beta", "gamma")

# N < 0 somewhere needs a^2 > 64/15; W >= 0 fails beyond a ~ 2.76614
_ALPHA_BETA_RANGE = (math.sqrt(64.0 / 15.0), 2.7661)


def builtin_potential(name: str, params: Mapping[str, float] | None = None) -> PotentialSpec:
    """Return one of the four reference nonlinearities.

    ``alpha_beta``     W = s^2/2 + s^3/3 - a s^4/4 + s^5/5   (default a = 2.5)
    ``alpha_nonbeta``  W = log(1-s+s^2)/2 + [atan((2s-1)/sqrt3) + pi/6]/sqrt3
    ``nonalpha_beta``  W = s^2/2 - a s^3/3 + s^4/4           (a in (0, 2), default 1)
    ``gamma``          W = s - log(1+s)
    """
    params = dict(params or {})
    if name == "alpha_beta":
        a = float(params.pop("a", 2.5))
        lo, hi = _ALPHA_BETA_RANGE
        if not lo < a < hi:
            raise ValueError(f"alpha_beta needs a in ({lo:.4f}, {hi:.4f}); got {a}")
        terms = (
            Term("power", 0.5, 2.0),
            Term("power", 1.0 / 3.0, 3.0),
            Term("power", -a / 4.0, 4.0),
            Term("power", 0.2, 5.0),
        )
        out = PotentialSpec(name, terms, {"a": a})
    elif name == "alpha_nonbeta":
        terms = (
            Term("logq", 0.5),
            Term("atan", 1.0 / math.sqrt(3.0)),
            Term("const", math.pi / (6.0 * math.sqrt(3.0))),
        )
        out = PotentialSpec(name, terms)
    elif name == "nonalpha_beta":
        a = float(params.pop("a", 1.0))
        if not 0.0 < a < 2.0:
            raise ValueError(f"nonalpha_beta needs a in (0, 2); got {a}")
        terms = (
            Term("power", 0.5, 2.0),
            Term("power", -a / 3.0, 3.0),
            Term("power", 0.25, 4.0),
        )
        out = PotentialSpec(name, terms, {"a": a})
    elif name == "gamma":
        terms = (Term("power", 1.0, 1.0), Term("log1p", -1.0))
        out = PotentialSpec(name, terms)
    elif name == "quadratic":
        out = PotentialSpec(name, (Term("power", 0.5, 2.0),))
    else:
        raise ValueError(f"unknown potential {name!r}; choose from {BUILTIN_NAMES}")
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    return out


def beta_bound(p: PotentialSpec, s_max: float = 1e3, samples: int = 20001) -> float:
    """Smallest b with N'(s) >= 0 on (b, s_max]; inf if N' is negative near s_max.

    For the built-ins this is the largest positive root of N', located on a
    log grid and polished with Brent's method.
    """
    s = np.geomspace(1e-6, s_max, samples)
    dn = p.dN(s)
    neg = np.nonzero(dn < 0)[0]
    if neg.size == 0:
        return 0.0
    last = neg[-1]
    if last == samples - 1:
        return math.inf
    return float(optimize.brentq(p.dN, s[last], s[last + 1], xtol=1e-14))


# --------------------------------------------------------------------------
# custom potentials

_BASIS = [
    (re.compile(r"^s\s*(?:\^|\*\*)\s*([0-9.]+)$"), "power"),
    (re.compile(r"^s$"), "power1"),
    (re.compile(r"^log\(\s*1\s*\+\s*s\s*\)$"), "log1p"),
    (re.compile(r"^log\(\s*1\s*-\s*s\s*\+\s*s\s*(?:\^|\*\*)\s*2\s*\)$"), "logq"),
    (re.compile(r"^atan\(\s*\(\s*2\s*\*?\s*s\s*-\s*1\s*\)\s*/\s*sqrt\(\s*3\s*\)\s*\)$"), "atan"),
]

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_coeff(text: str) -> float:
    """Evaluate a numeric coefficient such as ``1/3`` or ``pi/(6*sqrt(3))``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id == "sqrt"
            and len(node.args) == 1
        ):
            return math.sqrt(ev(node.args[0]))
        raise ValueError(f"unsupported coefficient expression: {text!r}")

    return ev(ast.parse(text, mode="eval").body)


def _split_top_level(expr: str) -> list[str]:
    """Split on + and - that are outside parentheses, keeping the sign."""
    pieces, depth, start = [], 0, 0
    for i, ch in enumerate(expr):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            prev = expr[:i].rstrip()
            # exponent or coefficient sign such as "1e-3" or "*-2"
            if prev and (prev[-1] in "*/^(" or re.search(r"[0-9.]e$", prev)):
                continue
            pieces.append(expr[start:i])
            start = i
    pieces.append(expr[start:])
    return [p.strip() for p in pieces if p.strip()]


def parse_terms(expr: str) -> tuple[Term, ...]:
    """Parse ``"0.5*s^2 - 0.25*s^4 + 1/3*log(1+s)"`` into terms."""
    terms = []
    for raw in _split_top_level(expr.replace("\n", " ")):
        piece = raw.replace(" ", "")
        sign = 1.0
        if piece[0] in "+-":
            sign = -1.0 if piece[0] == "-" else 1.0
            piece = piece[1:]
        for pattern, kind in _BASIS:
            # try "coeff*basis", then bare "basis"
            for coeff_text, basis in _candidate_splits(piece):
                m = pattern.match(basis)
                if m is None:
                    continue
                coeff = sign * (_eval_coeff(coeff_text) if coeff_text else 1.0)
                if kind == "power":
                    terms.append(Term("power", coeff, float(m.group(1))))
                elif kind == "power1":
                    terms.append(Term("power", coeff, 1.0))
                else:
                    terms.append(Term(kind, coeff))
                break
            else:
                continue
            break
        else:
            if "s" in piece.replace("sqrt", ""):
                raise ValueError(f"cannot parse potential term {raw!r}")
            terms.append(Term("const", sign * _eval_coeff(piece)))
    if not terms:
        raise ValueError("empty potential expression")
    return tuple(terms)


def _candidate_splits(piece: str):
    yield "", piece
    depth = 0
    for i, ch in enumerate(piece):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "*" and depth == 0 and piece[i + 1 : i + 2] != "*" and piece[i - 1 : i] != "*":
            yield piece[:i], piece[i + 1 :]


def custom_potential(expr: str, name: str = "custom") -> PotentialSpec:
    return PotentialSpec(name, parse_terms(expr))


def parse_potential(text: str, terms: str | None = None) -> PotentialSpec:
    """Resolve a command-line selector ``name[:a=val,...]`` or ``custom``."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name == "custom":
        expr = terms if terms is not None else rest
        if not expr:
            raise ValueError("custom potential needs a term expression")
        return custom_potential(expr)
    params = {}
    for item in filter(None, (x.strip() for x in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"bad potential parameter {item!r}; expected key=value")
        params[key.strip()] = float(val)
    return builtin_potential(name, params)


# --------------------------------------------------------------------------
# normalization and the hylomorphy constant


@dataclass(frozen=True)
class NormalizationReport:
    W0: float
    dW0: float
    dW0_fd: float
    ddW0: float
    positivity_violations: tuple[float, ...]
    s_max: float

    def ok(self, tol: float = 1e-6) -> bool:
        return (
            abs(self.W0) <= tol
            and abs(self.dW0) <= tol
            and abs(self.ddW0 - 1.0) <= tol
            and not self.positivity_violations
        )

    @property
    def first_violation(self) -> float | None:
        return self.positivity_violations[0] if self.positivity_violations else None


def _richardson(estimate, h, order=1, levels=3):
    """Richardson table over step halving for an estimate with error sum c_j h^j."""
    table = [estimate(h / 2**k) for k in range(levels)]
    p = order
    while len(table) > 1:
        table = [(2**p * table[k + 1] - table[k]) / (2**p - 1) for k in range(len(table) - 1)]
        p += 1
    return table[0]


def check_normalization(p: PotentialSpec, s_max: float = 1e3, samples: int = 4000, h: float = 1e-3) -> NormalizationReport:
    """Finite-difference normalization data at s = 0 plus a sampled positivity scan."""
    W = p.W
    w0 = W(0.0)
    dw0 = p.dW(0.0)
    # (W(h) - W(0)) / h = W'(0) + W''(0) h / 2 + ...
    dw0_fd = _richardson(lambda step: (W(step) - w0) / step, h, order=1)
    # even extension: [W(h) - 2 W(0) + W(-h)] / h^2, with the slope removed
    ddw0 = _richardson(lambda step: 2.0 * (W(step) - w0 - dw0 * step) / step**2, h, order=1)
    s = np.geomspace(1e-6, s_max, samples)
    w = p.W(s)
    bad = tuple(float(x) for x in s[w < 0.0])
    return NormalizationReport(
        W0=float(w0),
        dW0=float(dw0),
        dW0_fd=float(dw0_fd),
        ddW0=float(ddw0),
        positivity_violations=bad,
        s_max=float(s_max),
    )


def require_normalized(p: PotentialSpec, tol: float = 1e-6) -> NormalizationReport:
    rep = check_normalization(p)
    if abs(rep.W0) > tol or abs(rep.dW0) > tol or abs(rep.ddW0 - 1.0) > tol:
        raise InvalidPotentialError(
            f"{p.label}: need W(0)=W'(0)=0 and W''(0)=1, got "
            f"W(0)={rep.W0:.3g}, W'(0)={rep.dW0:.3g}, W''(0)={rep.ddW0:.8g}"
        )
    return rep


@dataclass(frozen=True)
class HylomorphyConstant:
    lambda0: float
    argmin_s: float  # math.inf when the infimum is only approached as s -> inf
    at_infinity: bool
    samples_used: int
    sampled_min: float


def _ratio_limit_at_infinity(p: PotentialSpec) -> float:
    """lim W(s) / (s^2/2) as s -> inf, read off the dominant term."""
    top, coeff = -math.inf, 0.0
    for t in p.terms:
        if t.kind == "power" and t.power > top:
            top, coeff = t.power, t.coeff
    if top > 2.0:
        return math.inf if coeff > 0 else -math.inf
    if top == 2.0:
        return 2.0 * coeff
    # logarithms, bounded atan/const and sub-quadratic powers all vanish
    return 0.0


def lambda0(p: PotentialSpec, s_max: float = 1e3, samples: int = 2000) -> HylomorphyConstant:
    """inf over s > 0 of W(s) / (s^2/2).

    The ratio is sampled log-uniformly on [1e-4, s_max] and the discrete
    minimum polished by golden-section search.  If the minimum sits at
    ``s_max`` while the ratio is still decreasing, the infimum is reported as
    the asymptotic limit of the ratio and flagged ``at_infinity``.
    """
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    if samples < 100:
        raise ValueError("need at least 100 samples")
    require_normalized(p)

    def ratio(x):
        return p.W(x) / (0.5 * x * x)

    s = np.geomspace(1e-4, s_max, samples)
    q = ratio(s)
    k = int(np.argmin(q))
    if k == samples - 1 and q[-1] < q[-2]:
        limit = _ratio_limit_at_infinity(p)
        return HylomorphyConstant(
            lambda0=min(limit, float(q[-1])),
            argmin_s=math.inf,
            at_infinity=True,
            samples_used=samples,
            sampled_min=float(q[-1]),
        )
    if k == 0:
        # still decreasing toward s -> 0, where the ratio tends to W''(0) = 1
        if q[0] >= 1.0:
            return HylomorphyConstant(1.0, 0.0, False, samples, float(q[0]))
        return HylomorphyConstant(float(q[0]), float(s[0]), False, samples, float(q[0]))
    # a flat ratio (e.g. the pure quadratic) has no interior bracket
    if not (q[k] < q[k - 1] and q[k] < q[k + 1]):
        return HylomorphyConstant(float(q[k]), float(s[k]), False, samples, float(q[k]))
    res = optimize.minimize_scalar(
        ratio, bracket=(s[k - 1], s[k], s[k + 1]), method="golden", tol=1e-10
    )
    best_s, best = (float(res.x), float(res.fun)) if res.fun <= q[k] else (float(s[k]), float(q[k]))
    return HylomorphyConstant(best, best_s, False, samples, float(q[k]))
