"""Experiment engine: convergence sweeps, RMSE tables, slope reports.

A plan fixes the integrand, methods, the n = 2^m grid, repetitions, the
proposal, and the master seed.  Every repetition owns a substream seed
derived from (master, method, m, repetition), so results do not depend on
execution order, chunking, or worker count.  Scrambling work is batched
across repetitions per (method, m); estimates themselves go through the
same estimator functions a single run would use.

Ground truth is the integrand's known mean when available, otherwise the
quadrature oracle (d <= 2).  RMSE aggregation uses compensated summation
of sorted contributions, keeping it order-independent.
"""

from __future__ import annotations

import json
import math
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import rng
from .dist import DistributionSpec, normal_spec, student_t_spec
from .errors import ValidationError
from .estimators import (
    ESTIMATOR_FUNCS,
    EstimatorConfig,
    METHODS,
)
from .growth import TestIntegrand, classify, make_fast_growth_integrand
from .lowdisc import PointSet, digital_shift, owen_scramble_batch, sobol_points
from .oracle import (
    QuadratureSpec,
    constant_integrand,
    cosh_product_integrand,
    linear_integrand,
    quad_expectation,
    quadratic_integrand,
    slope_fit_detail,
)
from .projection import ProjectionConfig, radius_schedule

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "method", "d", "M", "nu", "m", "n", "reps", "rmse",
    "mean_estimate", "R_used", "seed", "wall_time_ms",
)

INTEGRANDS = {
    "fast-growth": lambda M, d: make_fast_growth_integrand(M, d),
    "linear": lambda M, d: linear_integrand(d),
    "quadratic": lambda M, d: quadratic_integrand(d),
    "cosh-product": lambda M, d: cosh_product_integrand(d),
    "constant": lambda M, d: constant_integrand(d),
}

UNSTABLE_RESIDUAL = 0.5  # log2-RMSE residual std beyond which a fit is flagged


@dataclass(frozen=True)
class ExperimentPlan:
    integrand: str = "fast-growth"
    M: float = 0.2
    d: int = 5
    methods: tuple[str, ...] = ("mc", "is-mc", "rqmc", "is-rqmc")
    m_min: int = 7
    m_max: int = 16
    repetitions: int = 100
    proposal: str = "student-t"
    nu: float = 3.0
    seed: int = 20240810
    out: str = "results.csv"
    R: float | None = None          # explicit radius override
    eps: float = 1.0
    randomization: str = "owen-scramble"

    def __post_init__(self):
        if self.m_min > self.m_max:
            raise ValidationError(f"empty m range: {self.m_min}..{self.m_max}")
        if self.repetitions < 2:
            raise ValidationError("RMSE needs at least 2 repetitions")
        if not self.methods:
            raise ValidationError("plan needs at least one method")
        for meth in self.methods:
            if meth not in METHODS:
                raise ValidationError(f"unknown method {meth!r}; choose from {METHODS}")
            if meth == "qmc":
                raise ValidationError(
                    "plain deterministic QMC has no repetition-based RMSE and its "
                    "point set starts at the origin (rejected by the unprojected "
                    "estimator); use rqmc, or pqmc for the projected variant"
                )
        if self.integrand not in INTEGRANDS:
            raise ValidationError(
                f"unknown integrand {self.integrand!r}; choose from {tuple(INTEGRANDS)}"
            )
        if self.proposal not in ("student-t", "normal"):
            raise ValidationError(f"unknown proposal {self.proposal!r}")
        if self.randomization not in ("owen-scramble", "digital-shift"):
            raise ValidationError(f"unknown randomization {self.randomization!r}")

    @property
    def m_values(self) -> range:
        return range(self.m_min, self.m_max + 1)

    def build_integrand(self) -> TestIntegrand:
        return INTEGRANDS[self.integrand](self.M, self.d)

    def build_proposal(self) -> DistributionSpec:
        if self.proposal == "student-t":
            return student_t_spec(self.nu, self.d)
        return normal_spec(self.d)


def parse_plan(text: str) -> ExperimentPlan:
    """Parse the plain-text key/value plan format (see README)."""
    kwargs = {}
    converters = {
        "integrand": str, "M": float, "d": int,
        "methods": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
        "m_min": int, "m_max": int, "repetitions": int,
        "proposal": str, "nu": float, "seed": int, "out": str,
        "R": float, "eps": float, "randomization": str,
    }
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"plan line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in converters:
            raise ValidationError(f"plan line {lineno}: unknown key {key!r}")
        try:
            kwargs[key] = converters[key](value)
        except ValueError as exc:
            raise ValidationError(f"plan line {lineno}: bad value for {key}: {exc}") from exc
    return ExperimentPlan(**kwargs)


@dataclass(frozen=True)
class ResultRow:
    method: str
    d: int
    M: float
    nu: float
    m: int
    n: int
    reps: int
    rmse: float
    mean_estimate: float
    R_used: float | None
    seed: int
    wall_time_ms: float


@dataclass
class ExperimentResult:
    rows: list[ResultRow] = field(default_factory=list)
    plan: ExperimentPlan | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(
                    f"{r.method},{r.d},{r.M:.17g},{r.nu:.17g},{r.m},{r.n},{r.reps},"
                    f"{r.rmse:.17g},{r.mean_estimate:.17g},"
                    f"{'' if r.R_used is None else format(r.R_used, '.17g')},"
                    f"{r.seed},{r.wall_time_ms:.3f}\n"
                )

    def write_sidecar(self, csv_path) -> None:
        meta = {
            "schema_version": SCHEMA_VERSION,
            "git_hash": _git_hash(),
            "plan": asdict(self.plan) if self.plan is not None else None,
        }
        with open(str(csv_path) + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def from_csv(path) -> "ExperimentResult":
        rows = []
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            if tuple(header) != CSV_COLUMNS:
                raise ValidationError(
                    f"CSV columns {header} do not match the contract {list(CSV_COLUMNS)}"
                )
            for line in fh:
                parts = line.rstrip("\n").split(",")
                rows.append(ResultRow(
                    method=parts[0], d=int(parts[1]), M=float(parts[2]),
                    nu=float(parts[3]), m=int(parts[4]), n=int(parts[5]),
                    reps=int(parts[6]), rmse=float(parts[7]),
                    mean_estimate=float(parts[8]),
                    R_used=float(parts[9]) if parts[9] else None,
                    seed=int(parts[10]), wall_time_ms=float(parts[11]),
                ))
        return ExperimentResult(rows=rows)


def _git_hash() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5,
        )
        return out.stdout.strip() if out.returncode == 0 else "unknown"
    except OSError:
        return "unknown"


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def resolve_radius(plan: ExperimentPlan, method: str, m: int) -> float:
    """Radius used by a projected method at n = 2^m (explicit override wins)."""
    if plan.R is not None:
        return plan.R
    n = 1 << m
    if method == "pqmc":
        g = plan.build_integrand().growth_class
        rule = "pqmc-poly" if (g is not None and g.kind == "polynomial") else "pqmc-exp"
        return radius_schedule(rule, n)
    if method in ("is-pqmc", "is-rqmc"):
        return radius_schedule(method, n, plan.M)
    raise ValidationError(f"method {method!r} has no radius schedule")


def _truth_value(plan: ExperimentPlan, integrand: TestIntegrand) -> float:
    if integrand.known_mean is not None:
        return integrand.known_mean
    if plan.d <= 2:
        return quad_expectation(integrand.fn, normal_spec(plan.d), QuadratureSpec())
    raise ValidationError(
        "no ground truth: integrand has no known mean and the quadrature "
        f"oracle stops at d = 2 (plan has d = {plan.d})"
    )


def _validate_plan_method(plan: ExperimentPlan, method: str,
                          integrand: TestIntegrand) -> None:
    g = integrand.growth_class
    if g is not None and classify(g) == "divergent-risk":
        raise ValidationError(
            f"integrand class {g} risks a divergent integral; no method applies"
        )
    cfg = EstimatorConfig(
        method=method, integrand=integrand, d=plan.d,
        proposal=plan.build_proposal() if method.startswith("is-") else None,
        n=4, seed=0,
    )
    cfg.validate_plan()


def _chunked(seq, size):
    for start in range(0, len(seq), size):
        yield seq[start:start + size]


def _run_cell(plan: ExperimentPlan, method: str, m: int,
              integrand: TestIntegrand, truth: float) -> ResultRow:
    """All repetitions of one (method, m) grid cell."""
    t0 = time.perf_counter()
    n = 1 << m
    proposal = plan.build_proposal() if method.startswith("is-") else None
    r_used = resolve_radius(plan, method, m) if method in ("pqmc", "is-pqmc") else None
    projection = ProjectionConfig(R=r_used, eps=plan.eps) if r_used is not None else None
    rep_seeds = [rng.derive_seed(plan.seed, method, m, rep)
                 for rep in range(plan.repetitions)]
    func = ESTIMATOR_FUNCS[method]

    estimates: list[float] = []
    if method in ("mc", "is-mc"):
        for seed in rep_seeds:
            cfg = EstimatorConfig(method=method, integrand=integrand, d=plan.d,
                                  proposal=proposal, n=n, seed=seed)
            estimates.append(func(cfg).value)
    else:
        base = sobol_points(m, plan.d)
        chunk = max(1, (1 << 22) // (n * plan.d))  # cap batch memory
        for seeds in _chunked(rep_seeds, chunk):
            if plan.randomization == "owen-scramble":
                batch = owen_scramble_batch(base, list(seeds))
                sets = [
                    PointSet(batch[i], generator=base.generator, seed=s,
                             randomization="owen-scramble", net=base.net)
                    for i, s in enumerate(seeds)
                ]
            else:
                sets = [digital_shift(base, s) for s in seeds]
            for pts, seed in zip(sets, seeds):
                cfg = EstimatorConfig(method=method, integrand=integrand, d=plan.d,
                                      proposal=proposal, projection=projection,
                                      points=pts, seed=seed)
                estimates.append(func(cfg).value)

    mean_est = math.fsum(sorted(estimates)) / len(estimates)
    rmse = math.sqrt(math.fsum(sorted((e - truth) ** 2 for e in estimates))
                     / len(estimates))
    wall_ms = (time.perf_counter() - t0) * 1e3
    return ResultRow(method=method, d=plan.d, M=plan.M, nu=plan.nu, m=m, n=n,
                     reps=plan.repetitions, rmse=rmse, mean_estimate=mean_est,
                     R_used=r_used, seed=plan.seed, wall_time_ms=wall_ms)


def run_convergence(plan: ExperimentPlan, workers: int = 1) -> ExperimentResult:
    """Run the full (method, m) grid of the plan.

    Deterministic given the plan and master seed: each repetition derives
    its own substream, and rows are emitted in plan order regardless of
    worker scheduling.
    """
    integrand = plan.build_integrand()
    for method in plan.methods:
        _validate_plan_method(plan, method, integrand)
    truth = _truth_value(plan, integrand)

    cells = [(method, m) for method in plan.methods for m in plan.m_values]
    if workers <= 1:
        rows = [_run_cell(plan, method, m, integrand, truth) for method, m in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(
                lambda cell: _run_cell(plan, cell[0], cell[1], integrand, truth),
                cells,
            ))
    return ExperimentResult(rows=rows, plan=plan)


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodSlope:
    method: str
    slope: float
    intercept: float
    resid_std: float
    unstable: bool
    points_used: int


def default_window(m_min: int, m_max: int) -> tuple[int, int]:
    """Skip pre-asymptotic points: m in [max(8, m_min+2), m_max].

    Falls back to the full range when the data stops before the preferred
    window starts.
    """
    lo = max(8, m_min + 2)
    return (lo, m_max) if lo <= m_max else (m_min, m_max)


def report(result: ExperimentResult, window: tuple[int, int] | None = None
           ) -> list[MethodSlope]:
    """Per-method slope fits of log2(rmse) vs log2(n) over an m window."""
    if not result.rows:
        raise ValidationError("empty result; nothing to report")
    methods = []
    for row in result.rows:
        if row.method not in methods:
            methods.append(row.method)
    m_all = sorted({row.m for row in result.rows})
    if window is None:
        window = default_window(min(m_all), max(m_all))
    lo, hi = window
    if lo > hi or hi < min(m_all) or lo > max(m_all):
        raise ValidationError(f"window {window} lies outside the data range {m_all}")

    out = []
    for method in methods:
        rows = sorted((r for r in result.rows if r.method == method), key=lambda r: r.m)
        xs = [r.m for r in rows if lo <= r.m <= hi]
        ys = [math.log2(r.rmse) if r.rmse > 0 else -math.inf for r in rows
              if lo <= r.m <= hi]
        if any(math.isinf(y) for y in ys):
            # exact methods (rmse 0): slope undefined, report a stable -inf fit
            out.append(MethodSlope(method, -math.inf, -math.inf, 0.0, False, len(xs)))
            continue
        slope, intercept, resid = slope_fit_detail(xs, ys)
        out.append(MethodSlope(method, slope, intercept, resid,
                               resid > UNSTABLE_RESIDUAL, len(xs)))
    return out


def format_report(slopes: list[MethodSlope], window: tuple[int, int] | None = None) -> str:
    lines = ["method      slope   resid_std  flags"]
    for s in slopes:
        flag = "unstable" if s.unstable else ""
        lines.append(f"{s.method:<10s}  {s.slope:+.3f}  {s.resid_std:9.3f}  {flag}")
    return "\n".join(lines)
