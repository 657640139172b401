"""Command-line interface.

Subcommands:
  generate     dump (randomized) Sobol' points as CSV
  estimate     one estimator run
  convergence  RMSE sweep over n = 2^m from a plan file or flags
  verify       run the lemma bound suite, emit BoundReports as CSV
  report       fit per-method slopes from a results CSV

Exit codes: 0 ok, 2 validation error, 3 numerical-accuracy error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import AccuracyError, SingularPointError, ValidationError
from .estimators import ESTIMATOR_FUNCS, EstimatorConfig, QmcSource
from .harness import (
    ExperimentPlan,
    ExperimentResult,
    INTEGRANDS,
    format_report,
    parse_plan,
    report,
    run_convergence,
)
from .lowdisc import digital_shift, dump_points_csv, owen_scramble, sobol_points
from .projection import ProjectionConfig


def _add_generate(sub):
    p = sub.add_parser("generate", help="dump a point set as CSV")
    p.add_argument("--m", type=int, required=True, help="resolution, n = 2^m")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--randomization", choices=["none", "owen-scramble", "digital-shift"],
                   default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)


def _add_estimate(sub):
    p = sub.add_parser("estimate", help="single estimator run")
    p.add_argument("--method", choices=sorted(ESTIMATOR_FUNCS), required=True)
    p.add_argument("--integrand", choices=sorted(INTEGRANDS), default="fast-growth")
    p.add_argument("--M", type=float, default=0.2)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--m", type=int, default=10, help="resolution for QMC methods, n = 2^m")
    p.add_argument("--n", type=int, default=None, help="sample count for MC methods")
    p.add_argument("--nu", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--R", type=float, default=None, help="explicit projection radius")
    p.add_argument("--eps", type=float, default=1.0)


def _add_convergence(sub):
    p = sub.add_parser("convergence", help="RMSE sweep")
    p.add_argument("--plan", default=None, help="plan file (key = value lines)")
    p.add_argument("--integrand", choices=sorted(INTEGRANDS), default=None)
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--methods", default=None, help="comma-separated method list")
    p.add_argument("--m-min", type=int, default=None)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=1)


def _add_verify(sub):
    p = sub.add_parser("verify", help="run the lemma bound suite")
    p.add_argument("--out", required=True, help="CSV of BoundReports")
    p.add_argument("--d", type=int, nargs="*", default=[1, 2])
    p.add_argument("--R", type=float, nargs="*", default=[3.0, 4.0, 5.0, 6.0])
    p.add_argument("--M", type=float, nargs="*", default=[0.1, 0.2])
    p.add_argument("--nu", type=float, default=3.0)


def _add_report(sub):
    p = sub.add_parser("report", help="fit slopes from a results CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--window-min", type=int, default=None)
    p.add_argument("--window-max", type=int, default=None)
    p.add_argument("--out", default=None, help="optional CSV of the fitted slopes")
    p.add_argument("--predict-class", default=None, metavar="EXPR",
                   help="growth-class expression, e.g. 'Ge(0.2,1,2)' or "
                        "'2*Gp(1,1,3)+Ge(0.1,1,1)'; prints the predicted "
                        "rate exponent per fitted method")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussqmc")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_estimate(sub)
    _add_convergence(sub)
    _add_verify(sub)
    _add_report(sub)
    return parser


def _cmd_generate(args) -> int:
    pts = sobol_points(args.m, args.d)
    if args.randomization == "owen-scramble":
        pts = owen_scramble(pts, args.seed)
    elif args.randomization == "digital-shift":
        pts = digital_shift(pts, args.seed)
    dump_points_csv(pts, args.out)
    print(f"wrote {pts.n} x {pts.d} points to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    from .dist import student_t_spec

    integrand = INTEGRANDS[args.integrand](args.M, args.d)
    is_mc_method = args.method in ("mc", "is-mc")
    proposal = student_t_spec(args.nu, args.d) if args.method.startswith("is-") else None
    projection = ProjectionConfig(R=args.R, eps=args.eps) if args.R is not None else None
    cfg = EstimatorConfig(
        method=args.method,
        integrand=integrand,
        d=args.d,
        proposal=proposal,
        projection=projection,
        points=None if is_mc_method else QmcSource(
            m=args.m,
            randomization="none" if args.method in ("qmc", "pqmc", "is-pqmc") else "owen-scramble",
            seed=args.seed,
        ),
        n=args.n if args.n is not None else (1 << args.m),
        seed=args.seed,
    )
    est = ESTIMATOR_FUNCS[args.method](cfg)
    r_txt = "" if est.r_used is None else f"  R={est.r_used:.6g}"
    print(f"method={est.method}  n={est.n}  estimate={est.value:.12g}{r_txt}  seed={est.seed}")
    return 0


def _cmd_convergence(args) -> int:
    if args.plan is not None:
        with open(args.plan, encoding="utf-8") as fh:
            plan = parse_plan(fh.read())
        overrides = {}
    else:
        overrides = {}
    for key, attr in [("integrand", "integrand"), ("M", "M"), ("d", "d"),
                      ("m_min", "m_min"), ("m_max", "m_max"), ("reps", "repetitions"),
                      ("nu", "nu"), ("seed", "seed"), ("out", "out")]:
        value = getattr(args, key, None)
        if value is not None:
            overrides[attr] = value
    if args.methods is not None:
        overrides["methods"] = tuple(x.strip() for x in args.methods.split(","))
    if args.plan is not None:
        from dataclasses import replace
        plan = replace(plan, **overrides)
    else:
        plan = ExperimentPlan(**overrides)
    result = run_convergence(plan, workers=args.workers)
    result.to_csv(plan.out)
    result.write_sidecar(plan.out)
    print(f"wrote {len(result.rows)} rows to {plan.out}")
    try:
        print(format_report(report(result)))
    except ValidationError as exc:
        print(f"(slope fit skipped: {exc})")
    return 0


def _cmd_verify(args) -> int:
    from .oracle import bound_suite

    reports = bound_suite(d_values=args.d, R_values=args.R,
                          M_values=args.M, nu=args.nu)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("lemma,d,R,M,B,k,lhs,rhs,pass\n")
        for r in reports:
            fh.write(
                f"{r.lemma},{r.d},{r.R:.17g},{r.M:.17g},{r.B:.17g},{r.k:.17g},"
                f"{r.lhs:.17g},{r.rhs:.17g},{str(r.passed).lower()}\n"
            )
    n_fail = sum(not r.passed for r in reports)
    print(f"{len(reports)} bound checks, {n_fail} failures -> {args.out}")
    return 0 if n_fail == 0 else 3


def _cmd_report(args) -> int:
    result = ExperimentResult.from_csv(args.csv)
    window = None
    if args.window_min is not None or args.window_max is not None:
        m_all = sorted({row.m for row in result.rows})
        lo = args.window_min if args.window_min is not None else min(m_all)
        hi = args.window_max if args.window_max is not None else max(m_all)
        window = (lo, hi)
    slopes = report(result, window)
    print(format_report(slopes))
    if args.predict_class is not None:
        from .growth import parse_class_expr, predicted_rate

        cls = parse_class_expr(args.predict_class)
        for s in slopes:
            if s.method in ("mc", "is-mc"):
                rate = -0.5  # sampling error, class-independent
            else:
                try:
                    rate = predicted_rate(cls, s.method)
                except ValidationError as exc:
                    print(f"predicted {s.method}: {exc}")
                    continue
            print(f"predicted {s.method}: n^{rate:+.2f} (fitted {s.slope:+.3f})")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("method,slope,intercept,resid_std,unstable,points_used\n")
            for s in slopes:
                fh.write(f"{s.method},{s.slope:.17g},{s.intercept:.17g},"
                         f"{s.resid_std:.17g},{str(s.unstable).lower()},{s.points_used}\n")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    commands = {
        "generate": _cmd_generate,
        "estimate": _cmd_estimate,
        "convergence": _cmd_convergence,
        "verify": _cmd_verify,
        "report": _cmd_report,
    }
    try:
        return commands[args.command](args)
    except (ValidationError, SingularPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"numerical accuracy error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
