"""Integration estimators: MC, IS-MC, QMC, P-QMC, RQMC, IS-P-QMC, IS-RQMC.

Every method runs the same inverse-transform pipeline -- cube points,
componentwise quantile, optional smoothed projection, integrand average --
and differs only in the point source, the proposal distribution, and
whether the importance weight is attached.  That isolates the effect under
study and yields two exact collapse identities:

* identity proposal: with the standard normal proposal the weighted
  integrand equals the original bitwise, so every IS estimator reproduces
  its non-IS counterpart on identical points;
* inside-radius: when no transformed point leaves the projection identity
  band, projected and plain estimators agree bitwise.

Term sums use exact compensated summation (math.fsum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .dist import DistributionSpec, Normal, StudentT, map_inverse, normal_logpdf, normal_spec
from .errors import SingularPointError, ValidationError
from .growth import TestIntegrand, mul_classes, t_reciprocal_class
from .lowdisc import PointSet, owen_scramble, digital_shift, sobol_points
from .projection import ProjectionConfig, RADIUS_RULES, project_vector, radius_schedule

METHODS = ("mc", "is-mc", "qmc", "rqmc", "pqmc", "is-pqmc", "is-rqmc")


@dataclass(frozen=True)
class Estimate:
    """Result of a single estimator run."""

    value: float
    n: int
    method: str
    seed: int | None = None
    r_used: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValidationError(f"estimate must be finite, got {self.value}")
        if self.n <= 0:
            raise ValidationError(f"estimate needs n > 0, got {self.n}")


@dataclass(frozen=True)
class QmcSource:
    """Descriptor for lazily generated (randomized) Sobol' points."""

    m: int
    randomization: str = "owen-scramble"
    seed: int = 0


@dataclass(frozen=True)
class EstimatorConfig:
    """Everything one estimator run needs.

    points: an explicit PointSet, a QmcSource descriptor, or None (MC
    methods draw n pseudo-random points from the seeded stream instead).
    projection: a ProjectionConfig, the name of a radius-schedule rule, or
    None (projected methods then pick their default rule).
    """

    method: str
    integrand: TestIntegrand
    d: int
    proposal: DistributionSpec | None = None
    projection: ProjectionConfig | str | None = None
    points: PointSet | QmcSource | None = None
    n: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.d != self.integrand.d:
            raise ValidationError(
                f"config dimension {self.d} != integrand dimension {self.integrand.d}"
            )
        if self.proposal is not None and self.proposal.d != self.d:
            raise ValidationError(
                f"proposal dimension {self.proposal.d} != config dimension {self.d}"
            )

    def validate_plan(self) -> None:
        """Strict validation used by experiment plans: IS methods must carry
        a genuinely heavy-tailed square-integrable proposal."""
        if self.method.startswith("is-"):
            if self.proposal is None or self.proposal.is_normal:
                raise ValidationError(
                    f"{self.method} requires a non-normal proposal distribution"
                )
            for marg in self.proposal.marginals:
                if isinstance(marg, StudentT) and marg.nu < 3.0:
                    raise ValidationError(
                        f"IS proposals need nu >= 3 for a finite second moment, got {marg.nu}"
                    )
        if self.method in ("pqmc", "is-pqmc") and self.projection is None \
                and self.integrand.growth_class is None:
            raise ValidationError(
                f"{self.method} needs an explicit projection config/rule or a "
                "declared growth class to pick the default schedule"
            )


# ---------------------------------------------------------------------------
# Importance weight
# ---------------------------------------------------------------------------

def is_weight(h: TestIntegrand, g: DistributionSpec) -> TestIntegrand:
    """Weighted integrand h_IS = phi_d * h / g for proposal density g.

    The log-weight is accumulated per coordinate as log(phi) - log(g_j), so
    a normal proposal yields an exactly zero log-weight and h_IS == h
    bitwise.  When h carries a log evaluator the product is fused in log
    space, which keeps rapidly growing h from overflowing where the weight
    would cancel it.  Points with an infinite coordinate evaluate to 0 (the
    limit of the weighted integrand).
    """
    for marg in g.marginals:
        if not isinstance(marg, (Normal, StudentT)):
            raise ValidationError(f"unsupported proposal marginal {marg!r}")

    def log_weight(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape[:-1], dtype=np.float64)
        for j, marg in enumerate(g.marginals):
            xj = x[..., j]
            diff = normal_logpdf(xj) - marg.logpdf(xj)
            out = out + np.where(np.isinf(xj), -np.inf, diff)
        return out

    if h.log_fn is not None:
        base_log = h.log_fn

        def fn(x):
            with np.errstate(invalid="ignore", over="ignore"):
                logval = base_log(x) + log_weight(x)
            finite_kill = np.any(np.isinf(np.asarray(x)), axis=-1)
            return np.where(finite_kill, 0.0, np.exp(logval))

        def log_fn(x):
            return base_log(x) + log_weight(x)
    else:
        base = h.fn
        log_fn = None

        def fn(x):
            with np.errstate(invalid="ignore", over="ignore"):
                val = base(x) * np.exp(log_weight(x))
            finite_kill = np.any(np.isinf(np.asarray(x)), axis=-1)
            return np.where(finite_kill, 0.0, val)

    weighted_class = None
    if h.growth_class is not None:
        nus = [m.nu for m in g.marginals if isinstance(m, StudentT)]
        if nus:
            weighted_class = mul_classes(h.growth_class, t_reciprocal_class(max(nus)))
        else:
            weighted_class = h.growth_class

    return TestIntegrand(
        fn=fn,
        d=h.d,
        growth_class=weighted_class,
        known_mean=h.known_mean,
        gradient=None,
        log_fn=log_fn,
        name=f"is[{h.name}]",
    )


# ---------------------------------------------------------------------------
# Shared pipeline
# ---------------------------------------------------------------------------

def _resolve_points(cfg: EstimatorConfig) -> PointSet:
    src = cfg.points
    if isinstance(src, PointSet):
        return src
    if isinstance(src, QmcSource):
        base = sobol_points(src.m, cfg.d)
        if src.randomization == "none":
            return base
        if src.randomization == "owen-scramble":
            return owen_scramble(base, src.seed)
        if src.randomization == "digital-shift":
            return digital_shift(base, src.seed)
        raise ValidationError(f"unknown randomization {src.randomization!r}")
    raise ValidationError(f"{cfg.method} needs a point set or QmcSource")


def _resolve_projection(cfg: EstimatorConfig, n: int, default_rule: str | None) -> ProjectionConfig:
    proj = cfg.projection
    if isinstance(proj, ProjectionConfig):
        return proj
    if proj is None:
        if default_rule is None:
            raise ValidationError(f"method {cfg.method} needs a projection config or rule")
        proj = default_rule
    if proj not in RADIUS_RULES:
        raise ValidationError(f"unknown radius rule {proj!r}")
    M = None
    if proj in ("is-pqmc", "is-rqmc"):
        if cfg.integrand.growth_class is None:
            raise ValidationError("IS radius schedules need the integrand's declared growth class")
        M = cfg.integrand.growth_class.M
    return ProjectionConfig(R=radius_schedule(proj, n, M))


def _default_pqmc_rule(cfg: EstimatorConfig) -> str | None:
    g = cfg.integrand.growth_class
    if g is None:
        return None
    return "pqmc-poly" if g.kind == "polynomial" else "pqmc-exp"


def _average(integrand, y, spec, proj_cfg, *, reject_infinite: bool, method: str) -> float:
    x = map_inverse(y, spec)
    if proj_cfg is not None:
        x = project_vector(x, proj_cfg)
    elif reject_infinite and np.any(np.isinf(x)):
        raise SingularPointError(
            f"{method}: transformed sample contains an infinite coordinate "
            "(cube point on the boundary); use a projected method or "
            "randomized points"
        )
    terms = np.asarray(integrand.fn(x), dtype=np.float64)
    return math.fsum(terms.tolist()) / terms.shape[0]


def _mc_uniforms(cfg: EstimatorConfig) -> np.ndarray:
    if cfg.n is None or cfg.n < 1:
        raise ValidationError("MC methods need a positive sample count n")
    gen = rng.generator(cfg.seed, "mc-uniforms")
    return gen.random((cfg.n, cfg.d))


def _proposal(cfg: EstimatorConfig) -> DistributionSpec:
    return cfg.proposal if cfg.proposal is not None else normal_spec(cfg.d)


# ---------------------------------------------------------------------------
# Public estimators
# ---------------------------------------------------------------------------

def mc_estimate(cfg: EstimatorConfig) -> Estimate:
    """Plain Monte Carlo with inverse-transform sampling of the normal."""
    y = _mc_uniforms(cfg)
    value = _average(cfg.integrand, y, normal_spec(cfg.d), None,
                     reject_infinite=True, method="mc")
    return Estimate(value, y.shape[0], "mc", cfg.seed)


def is_mc_estimate(cfg: EstimatorConfig) -> Estimate:
    """Monte Carlo with importance sampling from the proposal."""
    y = _mc_uniforms(cfg)
    proposal = _proposal(cfg)
    weighted = is_weight(cfg.integrand, proposal)
    value = _average(weighted, y, proposal, None,
                     reject_infinite=False, method="is-mc")
    return Estimate(value, y.shape[0], "is-mc", cfg.seed)


def qmc_estimate(cfg: EstimatorConfig) -> Estimate:
    """Plain (R)QMC average of h(Phi^-1(y)); rejects boundary points."""
    pts = _resolve_points(cfg)
    method = "rqmc" if pts.randomization != "none" else "qmc"
    value = _average(cfg.integrand, pts.points, normal_spec(cfg.d), None,
                     reject_infinite=True, method=method)
    return Estimate(value, pts.n, method, pts.seed if pts.seed is not None else cfg.seed)


def pqmc_estimate(cfg: EstimatorConfig) -> Estimate:
    """Projected QMC: h(P_R(Phi^-1(y))); infinite quantiles saturate."""
    pts = _resolve_points(cfg)
    proj = _resolve_projection(cfg, pts.n, _default_pqmc_rule(cfg))
    value = _average(cfg.integrand, pts.points, normal_spec(cfg.d), proj,
                     reject_infinite=False, method="pqmc")
    return Estimate(value, pts.n, "pqmc",
                    pts.seed if pts.seed is not None else cfg.seed, r_used=proj.R)


def is_pqmc_estimate(cfg: EstimatorConfig) -> Estimate:
    """Importance-sampled projected QMC on the proposal's quantile map."""
    pts = _resolve_points(cfg)
    proposal = _proposal(cfg)
    proj = _resolve_projection(cfg, pts.n, "is-pqmc")
    weighted = is_weight(cfg.integrand, proposal)
    value = _average(weighted, pts.points, proposal, proj,
                     reject_infinite=False, method="is-pqmc")
    return Estimate(value, pts.n, "is-pqmc",
                    pts.seed if pts.seed is not None else cfg.seed, r_used=proj.R)


def is_rqmc_estimate(cfg: EstimatorConfig) -> Estimate:
    """Importance-sampled scrambled-net average, no projection.

    Requires randomized points: the variance guarantee comes from the
    randomization, and the boundary behaviour of the weighted integrand is
    only tamed in expectation.
    """
    pts = _resolve_points(cfg)
    if pts.randomization == "none":
        raise ValidationError("is-rqmc requires randomized points (scramble or shift)")
    proposal = _proposal(cfg)
    weighted = is_weight(cfg.integrand, proposal)
    value = _average(weighted, pts.points, proposal, None,
                     reject_infinite=False, method="is-rqmc")
    return Estimate(value, pts.n, "is-rqmc",
                    pts.seed if pts.seed is not None else cfg.seed)


ESTIMATOR_FUNCS = {
    "mc": mc_estimate,
    "is-mc": is_mc_estimate,
    "qmc": qmc_estimate,
    "rqmc": qmc_estimate,
    "pqmc": pqmc_estimate,
    "is-pqmc": is_pqmc_estimate,
    "is-rqmc": is_rqmc_estimate,
}


def estimate(cfg: EstimatorConfig) -> Estimate:
    """Dispatch on cfg.method."""
    return ESTIMATOR_FUNCS[cfg.method](cfg)
