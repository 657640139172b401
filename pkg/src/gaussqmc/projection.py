"""The smoothed saturation map P_R on extended reals.

P_R is the C^1 modification of clipping to [-R, R]: identity on
[-R+eps, R-eps], quadratic blends on (-R, -R+eps) and (R-eps, R), constant
-R+eps/2 and R-eps/2 outside.  It is defined on [-inf, +inf], so quantile
transforms may hand it infinite coordinates.  Radius schedules grow R with
the sample count to balance saturation error against quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ProjectionConfig:
    """Projection radius R and smoothing band width eps, 0 < eps < R."""

    R: float
    eps: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.eps < self.R):
            raise ValidationError(
                f"projection config needs 0 < eps < R, got eps={self.eps}, R={self.R}"
            )


def project_vector(x, cfg: ProjectionConfig) -> np.ndarray:
    """Apply P_R componentwise; works on any array shape, allows +-inf."""
    x = np.asarray(x, dtype=np.float64)
    R, eps = cfg.R, cfg.eps
    ax = np.abs(x)
    sign = np.where(x >= 0.0, 1.0, -1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        blend = -(ax * ax) / (2.0 * eps) + (R / eps) * ax - (R - eps) ** 2 / (2.0 * eps)
    out = np.where(ax <= R - eps, x, 0.0)
    out = np.where((ax > R - eps) & (ax < R), sign * blend, out)
    out = np.where(ax >= R, sign * (R - eps / 2.0), out)
    return out


def project_scalar(x: float, cfg: ProjectionConfig) -> float:
    """Scalar P_R(x); x may be +-inf."""
    return float(project_vector(np.asarray([x]), cfg)[0])


def project_derivative_vector(x, cfg: ProjectionConfig) -> np.ndarray:
    """dP_R/dx componentwise: 0 outside [-R, R], 1 on the identity band,
    linear ramps (R - |x|)/eps on the blend bands."""
    x = np.asarray(x, dtype=np.float64)
    R, eps = cfg.R, cfg.eps
    ax = np.abs(x)
    with np.errstate(invalid="ignore"):
        ramp = (R - ax) / eps
    out = np.where(ax <= R - eps, 1.0, 0.0)
    out = np.where((ax > R - eps) & (ax < R), ramp, out)
    out = np.where(ax >= R, 0.0, out)
    return out


def project_derivative(x: float, cfg: ProjectionConfig) -> float:
    return float(project_derivative_vector(np.asarray([x]), cfg)[0])


RADIUS_RULES = ("pqmc-poly", "pqmc-exp", "is-pqmc", "is-rqmc")

_PLAIN_FACTORS = {"pqmc-poly": 4.0, "pqmc-exp": 8.0}
_IS_FACTORS = {"is-pqmc": 2.0, "is-rqmc": 3.0}


def radius_schedule(rule: str, n: int, M: float | None = None) -> float:
    """Radius R(n) prescribed for each method family (natural log).

    pqmc-poly: sqrt(4 ln n) + 1        pqmc-exp: sqrt(8 ln n) + 1
    is-pqmc: sqrt(2/(1-2M) ln n) + 1   is-rqmc: sqrt(3/(1-2M) ln n) + 1
    """
    if rule not in RADIUS_RULES:
        raise ValidationError(f"unknown radius rule {rule!r}; choose from {RADIUS_RULES}")
    if n < 2:
        raise ValidationError(f"radius schedules need n >= 2, got n={n}")
    if rule in _PLAIN_FACTORS:
        return math.sqrt(_PLAIN_FACTORS[rule] * math.log(n)) + 1.0
    if M is None or not 0.0 < M < 0.5:
        raise ValidationError(
            f"rule {rule!r} needs a growth rate 0 < M < 1/2, got M={M}"
        )
    return math.sqrt(_IS_FACTORS[rule] / (1.0 - 2.0 * M) * math.log(n)) + 1.0
