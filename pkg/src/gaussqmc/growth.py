"""Growth-class descriptors and their algebra.

A GrowthClass records a uniform bound on a smooth function and all its
mixed partial derivatives: M|x|^k + B (polynomial kind) or B e^(M|x|^k)
(exponential kind).  The algebra (scale, add, multiply, compose) tracks how
these bounds combine; where only existence of the new constants is
guaranteed, concrete values are certified numerically on a fixed radial
grid (|x| in [0, 8], 801 points, 1.05 safety factor).

Classification:
  polynomial, or exponential with k < 2            -> "qmc-friendly"
  exponential with k = 2 and M < 1/2               -> "fast"
  exponential with k = 2, M >= 1/2 (or k > 2)      -> "divergent-risk"

The boundary exponent of a fast class is 2M; it drives the predicted
convergence-rate exponents per method.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dist import StudentT
from .errors import ValidationError

_GRID = np.linspace(0.0, 8.0, 801)
_SAFETY = 1.05
DEFAULT_SLACK = 1e-3


@dataclass(frozen=True)
class GrowthClass:
    """Descriptor (kind, M, B, k) of a growth bound."""

    kind: str  # "polynomial" | "exponential"
    M: float
    B: float
    k: float

    def __post_init__(self):
        if self.kind not in ("polynomial", "exponential"):
            raise ValidationError(f"kind must be polynomial or exponential, got {self.kind!r}")
        if not (self.M > 0.0 and self.B > 0.0 and self.k > 0.0):
            raise ValidationError(f"coefficients must be positive, got {self}")

    @property
    def divergent_risk(self) -> bool:
        return self.kind == "exponential" and (
            self.k > 2.0 or (self.k == 2.0 and self.M >= 0.5)
        )

    def bound(self, r):
        """Pointwise bound value at radius r = |x|."""
        r = np.asarray(r, dtype=np.float64)
        if self.kind == "polynomial":
            return self.M * r**self.k + self.B
        return self.B * np.exp(self.M * r**self.k)


@dataclass(frozen=True)
class TestIntegrand:
    """A concrete integrand with optional metadata used by estimators.

    fn evaluates points of shape (..., d) to values of shape (...).
    log_fn, when present, returns log|fn| for positive integrands; the
    importance-weight constructor fuses it with log densities to avoid
    overflow of rapidly growing factors.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    d: int
    growth_class: GrowthClass | None = None
    known_mean: float | None = None
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    log_fn: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "integrand"

    __test__ = False  # keep pytest from collecting this as a test class

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fn(x)


def make_fast_growth_integrand(M: float, d: int) -> TestIntegrand:
    """The normalized fast-growth test function  h(x) = C e^(M|x|^2).

    C = (1-2M)^(d/2) makes E[h(W)] = 1 under the standard normal for every
    d, which gives benchmark runs an exact ground truth.  Requires
    0 < M < 1/2 (the integral diverges otherwise).
    """
    if not 0.0 < M < 0.5:
        raise ValidationError(f"fast-growth integrand needs 0 < M < 1/2, got M={M}")
    if d < 1:
        raise ValidationError(f"dimension must be >= 1, got {d}")
    log_c = 0.5 * d * math.log1p(-2.0 * M)
    c = math.exp(log_c)

    def fn(x):
        x = np.asarray(x, dtype=np.float64)
        with np.errstate(over="ignore"):
            return np.exp(log_c + M * np.sum(x * x, axis=-1))

    def log_fn(x):
        x = np.asarray(x, dtype=np.float64)
        return log_c + M * np.sum(x * x, axis=-1)

    def gradient(x):
        x = np.asarray(x, dtype=np.float64)
        return 2.0 * M * x * fn(x)[..., None]

    return TestIntegrand(
        fn=fn,
        d=d,
        growth_class=GrowthClass("exponential", M=M, B=c, k=2.0),
        known_mean=1.0,
        gradient=gradient,
        log_fn=log_fn,
        name=f"fast-growth(M={M:g}, d={d})",
    )


# ---------------------------------------------------------------------------
# Numeric certification helpers
# ---------------------------------------------------------------------------

def _certify_exponential_B(target: np.ndarray, M: float, k: float) -> float:
    """Smallest-on-grid B with target(r) <= B e^(M r^k), times safety."""
    ratio = target * np.exp(-M * _GRID**k)
    return float(_SAFETY * np.max(ratio))


def _certify_polynomial(target: np.ndarray, k: float) -> tuple[float, float]:
    """Grid-certified (M, B) with target(r) <= M r^k + B: M is the chord
    slope to the far end of the grid, B absorbs the rest."""
    tiny = np.finfo(float).tiny
    m = float(_SAFETY * max((target[-1] - target[0]) / _GRID[-1] ** k, tiny))
    b = float(_SAFETY * max(np.max(target - m * _GRID**k), tiny))
    return m, b


def _certify_polynomial_B(target: np.ndarray, M: float, k: float) -> float:
    slack = target - M * _GRID**k
    return float(max(_SAFETY * np.max(slack), np.finfo(float).tiny))


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------

def scale_class(c: float, g: GrowthClass) -> GrowthClass:
    """Class of c*h for h in g."""
    if c == 0.0:
        raise ValidationError("scaling by zero collapses the class; handle constants directly")
    a = abs(c)
    if g.kind == "polynomial":
        return GrowthClass("polynomial", a * g.M, a * g.B, g.k)
    return GrowthClass("exponential", g.M, a * g.B, g.k)


def add_classes(g1: GrowthClass, g2: GrowthClass) -> GrowthClass:
    """Class containing sums h1 + h2."""
    if g1.kind == "polynomial" and g2.kind == "polynomial":
        return GrowthClass("polynomial", g1.M + g2.M, g1.B + g2.B, max(g1.k, g2.k))
    if g1.kind == "polynomial":
        g1, g2 = g2, g1  # exponential first
    target = g1.bound(_GRID) + g2.bound(_GRID)
    if g2.kind == "polynomial":
        return GrowthClass("exponential", g1.M, _certify_exponential_B(target, g1.M, g1.k), g1.k)
    if g1.k == g2.k:
        return GrowthClass("exponential", max(g1.M, g2.M), g1.B + g2.B, g1.k)
    if g1.k < g2.k:
        g1, g2 = g2, g1
        target = g1.bound(_GRID) + g2.bound(_GRID)
    return GrowthClass("exponential", g1.M, _certify_exponential_B(target, g1.M, g1.k), g1.k)


def mul_classes(g1: GrowthClass, g2: GrowthClass, slack: float = DEFAULT_SLACK) -> GrowthClass:
    """Class containing products h1 * h2.

    Mixed exponential cases gain `slack` on the rate coefficient, mirroring
    the for-any-epsilon structure of the underlying bound.
    """
    if slack <= 0.0:
        raise ValidationError("slack must be positive")
    if g1.kind == "polynomial" and g2.kind == "polynomial":
        # (M1 r^k1 + B1)(M2 r^k2 + B2) <= M3 r^(k1+k2) + B3 for
        # M3 = M1M2 + M1B2 + M2B1 and B3 = M1B2 + M2B1 + B1B2 (split r >= 1 / r < 1)
        m3 = g1.M * g2.M + g1.M * g2.B + g2.M * g1.B
        b3 = g1.M * g2.B + g2.M * g1.B + g1.B * g2.B
        return GrowthClass("polynomial", m3, b3, g1.k + g2.k)
    if g1.kind == "polynomial":
        g1, g2 = g2, g1
    target = g1.bound(_GRID) * g2.bound(_GRID)
    if g2.kind == "exponential" and g1.k == g2.k:
        return GrowthClass("exponential", g1.M + g2.M, g1.B * g2.B, g1.k)
    if g2.kind == "exponential" and g1.k < g2.k:
        g1, g2 = g2, g1
    m3 = g1.M + slack
    return GrowthClass("exponential", m3, _certify_exponential_B(target, m3, g1.k), g1.k)


def compose_classes(outer: GrowthClass, inner: GrowthClass,
                    slack: float = DEFAULT_SLACK) -> GrowthClass:
    """Class containing compositions h_outer(h_inner(x)) at the descriptor level."""
    target = outer.bound(inner.bound(_GRID))
    if outer.kind == "polynomial" and inner.kind == "polynomial":
        k3 = outer.k * inner.k
        m3, b3 = _certify_polynomial(target, k3)
        return GrowthClass("polynomial", m3, b3, k3)
    if outer.kind == "exponential" and inner.kind == "polynomial":
        k3 = outer.k * inner.k
        m3 = outer.M * inner.M**outer.k + slack
        return GrowthClass("exponential", m3, _certify_exponential_B(target, m3, k3), k3)
    if outer.kind == "polynomial" and inner.kind == "exponential":
        # M1 (B2 e^(M2 r^k2))^k1 + B1 <= (M1 B2^k1 + B1) e^(k1 M2 r^k2)
        k3 = inner.k
        m3 = outer.k * inner.M
        b3 = outer.M * inner.B**outer.k + outer.B
        return GrowthClass("exponential", m3, b3, k3)
    # exponential of exponential: grows beyond any class in this algebra
    raise ValidationError("composition of two exponential classes is not representable")


def classify(g: GrowthClass) -> str:
    """Map a class to {qmc-friendly, fast, divergent-risk}."""
    if g.kind == "polynomial" or g.k < 2.0:
        return "qmc-friendly"
    if g.k == 2.0 and g.M < 0.5:
        return "fast"
    return "divergent-risk"


def boundary_exponent(g: GrowthClass) -> float:
    """Largest boundary-growth exponent max_j A_j implied by the class.

    Fast classes give 2M; friendly classes admit arbitrarily small
    exponents, so the infimum 0 is returned.
    """
    kind = classify(g)
    if kind == "fast":
        return 2.0 * g.M
    if kind == "qmc-friendly":
        return 0.0
    raise ValidationError(f"no finite boundary exponent for divergent-risk class {g}")


_RATE_METHODS = ("qmc", "rqmc", "pqmc", "is-pqmc", "is-rqmc")


def predicted_rate(g: GrowthClass, method: str) -> float:
    """Leading convergence exponent of n (log factors ignored).

    Friendly classes: -1 for all deterministic/projected methods, -3/2 for
    the RMSE of importance-sampled scrambled nets.  Fast classes: plain
    (R)QMC degrades to -1+2M; importance sampling restores -1 and -3/2.
    """
    if method not in _RATE_METHODS:
        raise ValidationError(f"unknown method {method!r}; choose from {_RATE_METHODS}")
    kind = classify(g)
    if kind == "divergent-risk":
        raise ValidationError(f"no convergence rate for divergent-risk class {g}")
    if method == "is-rqmc":
        return -1.5
    if method == "is-pqmc":
        return -1.0
    if kind == "fast":
        return -1.0 + 2.0 * g.M
    return -1.0


def t_reciprocal_class(nu: float) -> GrowthClass:
    """Certified polynomial class of 1/g for the Student-t density g.

    1/g_nu(x) grows like |x|^(nu+1); the (M, B) pair is certified on the
    radial grid.
    """
    marginal = StudentT(nu)
    target = 1.0 / np.asarray(marginal.pdf(_GRID))
    k = nu + 1.0
    m3, b3 = _certify_polynomial(target, k)
    return GrowthClass("polynomial", m3, b3, k)


# ---------------------------------------------------------------------------
# Textual class expressions (CLI surface)
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<cls>G[ep])\s*\(|(?P<num>[0-9]+(?:\.[0-9]*)?(?:[eE][-+]?[0-9]+)?)"
    r"|(?P<op>[+*(),]))"
)


def parse_class_expr(text: str) -> GrowthClass:
    """Parse expressions like ``Ge(0.2,1,2)`` or ``2*Gp(1,1,3)+Ge(0.1,1,1)``.

    Grammar (documented in the README):
        expr   := term ('+' term)*
        term   := factor ('*' factor)*
        factor := NUMBER | class | '(' expr ')'
        class  := ('Ge' | 'Gp') '(' NUMBER ',' NUMBER ',' NUMBER ')'
    '+' adds classes, NUMBER '*' class scales, class '*' class multiplies.
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValidationError(f"bad class expression {text!r} near token {tok!r}")
        pos += 1
        return tok

    def parse_expr():
        value = parse_term()
        while peek() == "+":
            take("+")
            rhs = parse_term()
            value = _combine_add(value, rhs, text)
        return value

    def parse_term():
        value = parse_factor()
        while peek() == "*":
            take("*")
            rhs = parse_factor()
            value = _combine_mul(value, rhs, text)
        return value

    def parse_factor():
        tok = peek()
        if tok == "(":
            take("(")
            value = parse_expr()
            take(")")
            return value
        if isinstance(tok, float):
            take()
            return tok
        if tok in ("Ge", "Gp"):
            take()
            take("(")
            args = [take()]
            take(",")
            args.append(take())
            take(",")
            args.append(take())
            take(")")
            if not all(isinstance(a, float) for a in args):
                raise ValidationError(f"class arguments must be numbers in {text!r}")
            kind = "exponential" if tok == "Ge" else "polynomial"
            return GrowthClass(kind, *args)
        raise ValidationError(f"bad class expression {text!r} near token {tok!r}")

    result = parse_expr()
    if pos != len(tokens):
        raise ValidationError(f"trailing input in class expression {text!r}")
    if not isinstance(result, GrowthClass):
        raise ValidationError(f"expression {text!r} reduces to a bare number, not a class")
    return result


def _tokenize(text: str):
    tokens, pos = [], 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            if text[pos:].strip() == "":
                break
            raise ValidationError(f"bad class expression {text!r} at offset {pos}")
        if match.group("cls"):
            tokens.extend([match.group("cls"), "("])
        elif match.group("num"):
            tokens.append(float(match.group("num")))
        else:
            tokens.append(match.group("op"))
        pos = match.end()
    return tokens


def _combine_add(a, b, text):
    if isinstance(a, GrowthClass) and isinstance(b, GrowthClass):
        return add_classes(a, b)
    raise ValidationError(f"'+' needs two classes in {text!r}")


def _combine_mul(a, b, text):
    if isinstance(a, float) and isinstance(b, GrowthClass):
        return scale_class(a, b)
    if isinstance(a, GrowthClass) and isinstance(b, float):
        return scale_class(b, a)
    if isinstance(a, GrowthClass) and isinstance(b, GrowthClass):
        return mul_classes(a, b)
    if isinstance(a, float) and isinstance(b, float):
        return a * b
    raise ValidationError(f"'*' needs a scalar and a class, or two classes, in {text!r}")
