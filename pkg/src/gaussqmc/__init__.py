"""Quasi-Monte Carlo estimation of E[h(W)] under Gaussian measure for
unbounded smooth integrands, via smoothed projection and importance
sampling, with randomized low-discrepancy point sets and a benchmark
harness."""

from .dist import (
    DistributionSpec,
    Normal,
    StudentT,
    map_inverse,
    normal_pdf,
    normal_spec,
    phi_inv,
    student_t_spec,
    t_inv,
    t_pdf,
)
from .errors import (
    AccuracyError,
    BudgetExceededError,
    GaussQmcError,
    SingularPointError,
    UnsupportedDimensionError,
    ValidationError,
)
from .estimators import (
    Estimate,
    EstimatorConfig,
    QmcSource,
    estimate,
    is_mc_estimate,
    is_pqmc_estimate,
    is_rqmc_estimate,
    is_weight,
    mc_estimate,
    pqmc_estimate,
    qmc_estimate,
)
from .growth import (
    GrowthClass,
    TestIntegrand,
    add_classes,
    boundary_exponent,
    classify,
    compose_classes,
    make_fast_growth_integrand,
    mul_classes,
    parse_class_expr,
    predicted_rate,
    scale_class,
    t_reciprocal_class,
)
from .harness import (
    ExperimentPlan,
    ExperimentResult,
    parse_plan,
    report,
    resolve_radius,
    run_convergence,
)
from .lowdisc import (
    NetParams,
    PointSet,
    check_net,
    digital_shift,
    dump_points_csv,
    owen_scramble,
    sobol_points,
    star_discrepancy,
)
from .oracle import (
    BoundReport,
    QuadratureSpec,
    bound_suite,
    hk_variation_numeric,
    mixed_partial_fd,
    projection_error_sq,
    quad_expectation,
    slope_fit,
    variation_bound,
)
from .projection import (
    ProjectionConfig,
    project_derivative,
    project_scalar,
    project_vector,
    radius_schedule,
)

__version__ = "0.1.0"
