"""Independent brute-force verifiers.

Everything here exists to check the main code paths against slow, direct
computation: tensor quadrature for expectations at d <= 2, numeric
saturation-error and variation bounds with their closed-form counterparts,
finite-difference mixed partials, and least-squares slope fitting for
convergence studies.

Variation integrals of transported integrands (h composed with the
projection and a quantile map) are computed in x-space: the quantile
Jacobian of each differentiated coordinate cancels against the density in
the cube integral, leaving plain integrals of |mixed partials of
h o P_R| over [-R, R]^|u|.  That change of variables is exact and avoids
resolving exponentially thin boundary layers in cube coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dist import DistributionSpec, normal_spec, student_t_spec
from .errors import AccuracyError, UnsupportedDimensionError, ValidationError
from .estimators import is_weight
from .growth import GrowthClass, TestIntegrand, make_fast_growth_integrand
from .projection import ProjectionConfig, project_vector

FD_STEP = 1e-4


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre tensor rule on a truncated box."""

    nodes: int = 400
    radius: float = 10.0
    scheme: str = "composite-gauss-legendre"
    panel_order: int = 20

    def __post_init__(self):
        if self.nodes < 50:
            raise ValidationError(f"need at least 50 nodes per axis, got {self.nodes}")
        if self.radius < 8.0:
            raise ValidationError(f"truncation radius must be >= 8, got {self.radius}")


@dataclass(frozen=True)
class BoundReport:
    """One lemma check: numeric left side vs closed-form right side."""

    lemma: str
    d: int
    R: float
    M: float
    B: float
    k: float
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs


def _panel_nodes(lo: float, hi: float, n_nodes: int, order: int,
                 splits: Sequence[float] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [lo, hi].

    The interval is cut at `splits` (breakpoints of piecewise-smooth
    integrands) and each segment gets panels of `order` points, allocated
    proportionally to segment length.
    """
    cuts = sorted({lo, hi, *[s for s in splits if lo < s < hi]})
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    total = hi - lo
    for a, b in zip(cuts[:-1], cuts[1:]):
        n_panels = max(1, round(n_nodes / order * (b - a) / total))
        edges = np.linspace(a, b, n_panels + 1)
        for pa, pb in zip(edges[:-1], edges[1:]):
            half = 0.5 * (pb - pa)
            xs.append(0.5 * (pa + pb) + half * base_x)
            ws.append(half * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def _tensor_integral(f, axes: list[tuple[np.ndarray, np.ndarray]]) -> float:
    """Integrate a vectorized f over the tensor grid of (nodes, weights)."""
    if len(axes) == 1:
        x, w = axes[0]
        vals = np.asarray(f(x[:, None]), dtype=np.float64)
        return float(vals @ w)
    (x1, w1), (x2, w2) = axes
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    pts = np.stack([g1.ravel(), g2.ravel()], axis=-1)
    vals = np.asarray(f(pts), dtype=np.float64).reshape(len(x1), len(x2))
    return float(w1 @ vals @ w2)


def quad_expectation(f, spec: DistributionSpec, q: QuadratureSpec = QuadratureSpec()) -> float:
    """E[f(tau)] for tau ~ spec by tensor quadrature on [-radius, radius]^d.

    Doubles the node count and requires the two values to agree within
    1e-8 before returning the finer one.
    """
    d = spec.d
    if d > 2:
        raise UnsupportedDimensionError(f"quadrature oracle supports d <= 2, got d={d}")

    def weighted(x):
        return np.asarray(f(x), dtype=np.float64) * np.exp(spec.logpdf(x))

    def run(n_nodes):
        axes = [
            _panel_nodes(-q.radius, q.radius, n_nodes, q.panel_order)
            for _ in range(d)
        ]
        return _tensor_integral(weighted, axes)

    coarse = run(q.nodes)
    fine = run(2 * q.nodes)
    if abs(fine - coarse) > 1e-8:
        raise AccuracyError(
            f"quadrature did not converge: |{fine} - {coarse}| = {abs(fine - coarse):.3e} > 1e-8"
        )
    return fine


# ---------------------------------------------------------------------------
# Projection (saturation) error bounds
# ---------------------------------------------------------------------------

def _double_factorial(n: int) -> float:
    return float(math.prod(range(n, 0, -2))) if n > 0 else 1.0


def projection_error_sq(h: TestIntegrand, cfg: ProjectionConfig,
                        spec: DistributionSpec | None = None,
                        growth: GrowthClass | None = None,
                        q: QuadratureSpec = QuadratureSpec()) -> BoundReport:
    """Check E[(h(tau) - h(P_R(tau)))^2] against its closed-form bound.

    Under the normal measure the bound branch follows the growth class of h
    (polynomial needs R > 2; exponential needs order k < 2 and R > 1+sqrt2).
    Under a heavy-tailed proposal, pass the *weighted* integrand and the
    certified class of h/g; the bound is then
    16 A B^2 d (R-1)^2 exp(-(1-2M)(R-1)^2) with A = E|tau|^2, and requires
    R >= 1 + 1/sqrt(1-2M).
    """
    g = growth if growth is not None else h.growth_class
    if g is None:
        raise ValidationError("projection_error_sq needs a growth class")
    spec = spec if spec is not None else normal_spec(h.d)
    d, R = h.d, cfg.R

    if spec.is_normal:
        if g.kind == "polynomial":
            if R <= 2.0:
                raise ValidationError(f"polynomial bound requires R > 2, got R={R}")
            k2 = math.floor(2.0 * g.k)
            c1 = (
                (math.pi / 2.0) ** (d / 2.0 - 1.0)
                * (g.M**2 + g.B**2)
                * _double_factorial(k2 + d + 2)
            )
            rhs = c1 * (R - 1.0) ** (k2 + d - 1) * math.exp(-0.5 * (R - 1.0) ** 2)
            lemma = "proj-poly"
        else:
            if not g.k < 2.0:
                raise ValidationError(
                    "the exponential saturation bound covers order k < 2 only; "
                    "use importance sampling for k = 2"
                )
            if R <= 1.0 + math.sqrt(2.0):
                raise ValidationError(f"exponential bound requires R > 1+sqrt(2), got R={R}")
            c2 = (
                (math.pi / 2.0) ** (d / 2.0 - 1.0)
                * g.B**2
                * math.exp((4.0 * g.k * g.M) ** (g.k / (2.0 - g.k)))
                * _double_factorial(d + 2)
            )
            rhs = c2 * (R - 1.0) ** (d - 1) * math.exp(-0.25 * (R - 1.0) ** 2)
            lemma = "proj-exp"
    else:
        if not (g.kind == "exponential" and g.k == 2.0 and g.M < 0.5):
            raise ValidationError(
                "the importance-sampling bound needs a fast-growth class for h/g"
            )
        a2 = spec.second_moment()
        if not math.isfinite(a2):
            raise ValidationError("proposal must have a finite second moment")
        if R < 1.0 + 1.0 / math.sqrt(1.0 - 2.0 * g.M):
            raise ValidationError(
                f"IS bound requires R >= 1 + 1/sqrt(1-2M) = "
                f"{1.0 + 1.0 / math.sqrt(1.0 - 2.0 * g.M):.4f}, got R={R}"
            )
        rhs = (
            16.0 * a2 * g.B**2 * d * (R - 1.0) ** 2
            * math.exp(-(1.0 - 2.0 * g.M) * (R - 1.0) ** 2)
        )
        lemma = "proj-is"

    def sq_diff(x):
        hx = np.asarray(h.fn(x), dtype=np.float64)
        hp = np.asarray(h.fn(project_vector(x, cfg)), dtype=np.float64)
        return (hx - hp) ** 2

    lhs = quad_expectation(sq_diff, spec, q)
    return BoundReport(lemma, d, R, g.M, g.B, g.k, lhs, rhs)


# ---------------------------------------------------------------------------
# Variation in the sense of Hardy and Krause
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportedCubeFunction:
    """Cube function f(y) = g(Q(y)) whose variation is integrated in x-space.

    g is the x-space evaluator (projection already composed in), Q the
    componentwise quantile of the transport distribution.  Because the
    quantile Jacobian of every differentiated coordinate cancels the
    density, each variation term is the plain integral of |d^u g / dx_u|
    over [-x_limit, x_limit]^|u| with off-u coordinates anchored at +inf.
    """

    x_fn: Callable[[np.ndarray], np.ndarray]
    d: int
    x_limit: float
    breakpoints: tuple[float, ...] = ()


def modified_integrand(h: TestIntegrand, cfg: ProjectionConfig) -> TransportedCubeFunction:
    """The transported view of y -> h(P_R(quantile(y))).

    Mixed partials vanish for |x_j| > R, so integration truncates at R and
    panels split at the projection breakpoints.
    """
    def x_fn(x):
        return np.asarray(h.fn(project_vector(x, cfg)), dtype=np.float64)

    bp = (cfg.R - cfg.eps, cfg.R, -(cfg.R - cfg.eps), -cfg.R)
    return TransportedCubeFunction(x_fn=x_fn, d=h.d, x_limit=cfg.R, breakpoints=bp)


def _subsets(d: int):
    for mask in range(1, 1 << d):
        yield tuple(j for j in range(d) if mask >> j & 1)


def _fd_partial(f, pts: np.ndarray, u: tuple[int, ...], step: float,
                clamp01: bool) -> np.ndarray:
    """Central-difference mixed partial d^u f at rows of pts.

    clamp01 shifts stencil centers into [step, 1-step] per differentiated
    axis (boundary-shifted stencils on the cube).
    """
    centers = pts.copy()
    if clamp01:
        for j in u:
            centers[:, j] = np.clip(centers[:, j], step, 1.0 - step)
    vals = np.zeros(centers.shape[0], dtype=np.float64)
    half = step / 2.0
    for signs in range(1 << len(u)):
        shifted = centers.copy()
        parity = 1.0
        for i, j in enumerate(u):
            s = 1.0 if signs >> i & 1 else -1.0
            parity *= s
            shifted[:, j] += s * half
        vals += parity * np.asarray(f(shifted), dtype=np.float64)
    return vals / step ** len(u)


def hk_variation_numeric(f, d: int | None = None,
                         nodes: int = 200, fd_step: float = FD_STEP) -> float:
    """Hardy-Krause variation of a smooth function on [0,1]^d, d <= 2.

    Sums, over nonempty coordinate subsets u, the integral of the absolute
    mixed partial on the face y_-u = 1.  Partials use central differences
    (boundary-shifted); integrals use composite Gauss-Legendre with a
    node-doubling stability gate.

    Accepts either a plain vectorized cube function together with d, or a
    TransportedCubeFunction (see modified_integrand) whose terms integrate
    in x-space.
    """
    if isinstance(f, TransportedCubeFunction):
        return _hk_transported(f, nodes=nodes, fd_step=fd_step)
    if d is None:
        raise ValidationError("hk_variation_numeric needs d for plain cube functions")
    if d > 2:
        raise UnsupportedDimensionError(f"variation oracle supports d <= 2, got d={d}")

    def run(n_nodes):
        total = 0.0
        for u in _subsets(d):
            x, w = _panel_nodes(0.0, 1.0, n_nodes, 10)
            if len(u) == 1:
                grid = np.ones((len(x), d))
                grid[:, u[0]] = x
                vals = np.abs(_fd_partial(f, grid, u, fd_step, clamp01=True))
                total += float(vals @ w)
            else:
                g1, g2 = np.meshgrid(x, x, indexing="ij")
                grid = np.stack([g1.ravel(), g2.ravel()], axis=-1)
                vals = np.abs(_fd_partial(f, grid, u, fd_step, clamp01=True))
                total += float(w @ vals.reshape(len(x), len(x)) @ w)
        return total

    coarse, fine = run(nodes), run(2 * nodes)
    if abs(fine - coarse) > max(1e-6, 1e-3 * abs(fine)):
        raise AccuracyError(
            f"variation integral unstable under refinement: {coarse} vs {fine} "
            "(is the integrand smooth?)"
        )
    return fine


def _hk_transported(tf: TransportedCubeFunction, nodes: int, fd_step: float) -> float:
    if tf.d > 2:
        raise UnsupportedDimensionError(f"variation oracle supports d <= 2, got d={tf.d}")
    lim = tf.x_limit + 1.0  # margin past the derivative support

    def run(n_nodes):
        total = 0.0
        for u in _subsets(tf.d):
            x, w = _panel_nodes(-lim, lim, n_nodes, 10, splits=tf.breakpoints)
            if len(u) == 1:
                grid = np.full((len(x), tf.d), np.inf)
                grid[:, u[0]] = x
                vals = np.abs(_fd_partial(tf.x_fn, grid, u, fd_step, clamp01=False))
                total += float(vals @ w)
            else:
                g1, g2 = np.meshgrid(x, x, indexing="ij")
                grid = np.stack([g1.ravel(), g2.ravel()], axis=-1)
                vals = np.abs(_fd_partial(tf.x_fn, grid, u, fd_step, clamp01=False))
                total += float(w @ vals.reshape(len(x), len(x)) @ w)
        return total

    coarse, fine = run(nodes), run(2 * nodes)
    if abs(fine - coarse) > max(1e-6, 1e-3 * abs(fine)):
        raise AccuracyError(
            f"variation integral unstable under refinement: {coarse} vs {fine}"
        )
    return fine


def variation_bound(h: TestIntegrand, cfg: ProjectionConfig,
                    proposal: DistributionSpec | None = None,
                    growth: GrowthClass | None = None) -> BoundReport:
    """Check the numeric variation of the modified integrand against its bound.

    Normal transport: 2^(2d) (M d^(k/2) R^(k+d) + B R^d) for polynomial
    classes, 2^(2d) B R^d exp(M (sqrt(d) R)^k) for exponential classes.
    Heavy-tailed transport (weighted integrand, class of h/g):
    C(M,B,d) 2^(2d) R^d, where C(M,B,d) is the numeric sup of the
    derivative-bound envelope max_j 2^j B (j/(1-2M))^(j/2) e^(-j/2).
    """
    g = growth if growth is not None else h.growth_class
    if g is None:
        raise ValidationError("variation_bound needs a growth class")
    d, R = h.d, cfg.R
    if proposal is None or proposal.is_normal:
        if g.kind == "polynomial":
            rhs = 2.0 ** (2 * d) * (g.M * d ** (g.k / 2.0) * R ** (g.k + d) + g.B * R**d)
            lemma = "hk-poly"
        else:
            rhs = 2.0 ** (2 * d) * g.B * R**d * math.exp(g.M * (math.sqrt(d) * R) ** g.k)
            lemma = "hk-exp"
    else:
        if not (g.kind == "exponential" and g.k == 2.0 and g.M < 0.5):
            raise ValidationError("the IS variation bound needs a fast-growth class for h/g")
        env = max(
            2.0**j * g.B * (j / (1.0 - 2.0 * g.M)) ** (j / 2.0) * math.exp(-j / 2.0)
            for j in range(0, d + 1)
        )
        rhs = env * 2.0 ** (2 * d) * R**d
        lemma = "hk-is"
    lhs = hk_variation_numeric(modified_integrand(h, cfg))
    return BoundReport(lemma, d, R, g.M, g.B, g.k, lhs, rhs)


# ---------------------------------------------------------------------------
# Mixed partials and slope fitting
# ---------------------------------------------------------------------------

def mixed_partial_fd(f, x: np.ndarray, u: tuple[int, ...], step: float = FD_STEP) -> float:
    """Mixed partial d^u f(x) by tensor central differences, one Richardson pass."""
    if len(u) > 3:
        raise ValidationError(f"mixed_partial_fd supports |u| <= 3, got {len(u)}")
    if len(set(u)) != len(u):
        raise ValidationError("u must be a set of distinct coordinates")
    pts = np.asarray(x, dtype=np.float64)[None, :]
    coarse = _fd_partial(f, pts, tuple(u), step, clamp01=False)[0]
    fine = _fd_partial(f, pts, tuple(u), step / 2.0, clamp01=False)[0]
    return float((4.0 * fine - coarse) / 3.0)


def slope_fit(log2_n: Sequence[float], log2_rmse: Sequence[float],
              window: slice | None = None) -> float:
    """Least-squares slope of log2(rmse) against log2(n) over an index window."""
    return slope_fit_detail(log2_n, log2_rmse, window)[0]


def slope_fit_detail(log2_n, log2_rmse, window: slice | None = None
                     ) -> tuple[float, float, float]:
    """(slope, intercept, residual standard deviation) of the window fit."""
    x = np.asarray(log2_n, dtype=np.float64)
    y = np.asarray(log2_rmse, dtype=np.float64)
    if window is not None:
        x, y = x[window], y[window]
    if len(x) < 4:
        raise ValidationError(f"slope fit needs at least 4 points, got {len(x)}")
    if np.ptp(x) == 0.0:
        raise ValidationError("slope fit needs distinct abscissae")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(len(x) - 2, 1)
    return float(coef[0]), float(coef[1]), float(np.sqrt(resid @ resid / dof))


# ---------------------------------------------------------------------------
# Shipped verification suite
# ---------------------------------------------------------------------------

def constant_integrand(d: int, value: float = 1.0) -> TestIntegrand:
    """h(x) = value: every quadrature method is exact on it."""
    return TestIntegrand(
        fn=lambda x: np.full(np.asarray(x).shape[:-1], float(value)),
        d=d,
        growth_class=GrowthClass("polynomial", 1e-9, max(abs(value), 1e-9), 1.0),
        known_mean=float(value),
        name=f"constant({value:g}, d={d})",
    )


def linear_integrand(d: int) -> TestIntegrand:
    """h(x) = sum x_j, class (sqrt(d), 1, 1) polynomial, mean 0."""
    return TestIntegrand(
        fn=lambda x: np.sum(np.asarray(x, dtype=np.float64), axis=-1),
        d=d,
        growth_class=GrowthClass("polynomial", math.sqrt(d), 1.0, 1.0),
        known_mean=0.0,
        name=f"linear(d={d})",
    )


def quadratic_integrand(d: int) -> TestIntegrand:
    """h(x) = |x|^2, class (1, 2, 2) polynomial, mean d."""
    return TestIntegrand(
        fn=lambda x: np.sum(np.asarray(x, dtype=np.float64) ** 2, axis=-1),
        d=d,
        growth_class=GrowthClass("polynomial", 1.0, 2.0, 2.0),
        known_mean=float(d),
        name=f"quadratic(d={d})",
    )


def cosh_product_integrand(d: int, a: float = 0.8) -> TestIntegrand:
    """h(x) = prod cosh(a x_j): exponential growth of order 1, mean e^(a^2 d/2)."""
    def fn(x):
        return np.prod(np.cosh(a * np.asarray(x, dtype=np.float64)), axis=-1)

    return TestIntegrand(
        fn=fn,
        d=d,
        growth_class=GrowthClass("exponential", a * math.sqrt(d), 1.0, 1.0),
        known_mean=math.exp(a * a * d / 2.0),
        name=f"cosh-product(d={d})",
    )


def bound_suite(d_values: Sequence[int] = (1, 2),
                R_values: Sequence[float] = (3.0, 4.0, 5.0, 6.0),
                M_values: Sequence[float] = (0.1, 0.2),
                nu: float = 3.0) -> list[BoundReport]:
    """All shipped lemma checks: saturation error and variation, with and
    without importance sampling, for the stock integrand family."""
    reports = []
    for d in d_values:
        poly = [linear_integrand(d), quadratic_integrand(d)]
        expo = [cosh_product_integrand(d)]
        fast = [make_fast_growth_integrand(M, d) for M in M_values]
        proposal = student_t_spec(nu, d)
        for R in R_values:
            cfg = ProjectionConfig(R=R)
            for h in poly + expo:
                reports.append(projection_error_sq(h, cfg))
                reports.append(variation_bound(h, cfg))
            for h in fast:
                weighted = is_weight(h, proposal)
                wclass = weighted.growth_class
                reports.append(variation_bound(h, cfg))  # hk-exp branch, k=2
                reports.append(
                    projection_error_sq(weighted, cfg, spec=proposal, growth=wclass)
                )
                reports.append(
                    variation_bound(weighted, cfg, proposal=proposal, growth=wclass)
                )
    return reports
