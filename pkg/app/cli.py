"""
Command-line entry point.

    ou-kit verify [--system S ...] [--suite NAMES] [--out DIR] [--seed N]
                  [--tol F] [--grid SPEC] [--config FILE] [--plan PLAN]
    ou-kit eval {kernel,semigroup,resolvent,bounds} --system S --out FILE.csv ...

`verify` exits 0 iff every verification record passes, 1 otherwise and 2 on
invalid configuration. `eval` writes RFC-4180 CSV for external plotting.
"""
import argparse
import csv
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from app.models.suite_models import SUITE_NAMES, SuiteConfig, bundled_systems
from app.numerics.bounds import BoundConstants
from app.numerics.errors import ConfigInvalid, OUKitError, describe_error
from app.numerics.fields import constant_field, gaussian_bump
from app.numerics.grid import GridSpec, write_grid_csv, write_grid_header
from app.numerics.kernel import kernel_slice_rows, write_kernel_csv
from app.numerics.linalg import OUSystem, spectral_quantities
from app.numerics.resolvent import ResolventQuery, apply_resolvent, growth_rate
from app.numerics.semigroup import SemigroupQuery, apply_semigroup
from app.numerics.weights import make_weight
from app.verification.plan import VerificationPlan, plan_for_suites
from app.verification.plan_loader import get_default_plan_path, load_plan
from app.verification.report import summary_text, write_report
from app.verification.runner import run_plan
from app.verification.suites import load_system

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

# Half-width of the box carrying a "constant" input field
CONSTANT_HALF_WIDTH = 40.0


def _suite_list(values: Optional[List[str]]) -> Optional[List[str]]:
    if not values:
        return None
    return [name.strip() for value in values for name in value.split(",") if name.strip()]


def _plan(reference: Optional[str]) -> Optional[VerificationPlan]:
    if reference is None:
        return None
    path = reference if Path(reference).is_file() else get_default_plan_path(reference)
    try:
        return load_plan(path)
    except FileNotFoundError as exc:
        raise ConfigInvalid(f"Plan '{reference}' is neither a file nor a bundled plan") from exc


def build_verify_config(args: argparse.Namespace, plan: Optional[VerificationPlan] = None) -> SuiteConfig:
    """Plan config, then flags, then the --config file (highest precedence)."""
    values: Dict[str, Any] = dict(plan.config) if plan else {}
    flags = {
        "systems": args.system,
        "suites": _suite_list(args.suite),
        "out": args.out,
        "seed": args.seed,
        "tolerance": args.tol,
        "grid": args.grid,
        "threads": args.threads,
    }
    values.update({key: value for key, value in flags.items() if value is not None})
    return SuiteConfig.build(values, args.config)


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        plan = _plan(args.plan)
        config = build_verify_config(args, plan)
    except ConfigInvalid as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    plan = plan or plan_for_suites(config.suites, config.model_dump())
    logger.info(f"Verifying suites {config.suites} on systems {config.systems}")
    try:
        report = run_plan(plan, config)
    except ConfigInvalid as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    paths = write_report(report, config.out)
    print(summary_text(report), end="")
    logger.info(f"Report written to {paths['records']} and {paths['summary']}")
    return EXIT_OK if report.exit_code == 0 else EXIT_FAILED


def _eval_system(args: argparse.Namespace) -> OUSystem:
    try:
        return load_system(args.system)
    except ValueError as e:
        raise ConfigInvalid(str(e)) from e


def _eval_grid(args: argparse.Namespace, sys_: OUSystem) -> GridSpec:
    try:
        return GridSpec.parse(args.grid).with_dimension(sys_.d)
    except ValueError as e:
        raise ConfigInvalid(f"Invalid grid '{args.grid}': {e}") from e


def _input_field(args: argparse.Namespace, sys_: OUSystem):
    if args.constant is not None:
        return constant_field(sys_.d, [args.constant] * sys_.N, CONSTANT_HALF_WIDTH)
    return gaussian_bump(sys_.d, width=args.width, components=sys_.N)


def _write_rows(path: str, header: List[str], rows: List[List[float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def eval_bounds(args: argparse.Namespace) -> None:
    sys_ = _eval_system(args)
    sq = spectral_quantities(sys_, eta=args.eta, p=args.p)
    constants = BoundConstants(sq=sq, C_theta=args.C_theta, vartheta=args.vartheta)
    ts = np.geomspace(args.t_min, args.t_max, args.t_count)
    rows = [constants.row(float(t)) for t in ts]
    _write_rows(args.out, ["t", "C1", "C2", "C3", "C4", "C5", "C6"], rows)
    logger.info(f"C7 = {constants.C7:.6g}, C8 = {constants.C8:.6g} for {sys_.name}")


def eval_kernel(args: argparse.Namespace) -> None:
    sys_ = _eval_system(args)
    if not 0 <= args.axis < sys_.d:
        raise ConfigInvalid(f"Axis {args.axis} is outside 0..{sys_.d - 1}")
    radii = np.linspace(0.0, args.r_max, args.r_count)
    write_kernel_csv(args.out, sys_, kernel_slice_rows(sys_, args.t, radii, args.axis))


def eval_semigroup(args: argparse.Namespace) -> None:
    sys_ = _eval_system(args)
    spec = _eval_grid(args, sys_)
    result = apply_semigroup(SemigroupQuery(sys=sys_, t=args.t, v=_input_field(args, sys_), grid=spec))
    write_grid_csv(args.out, result)
    write_grid_header(f"{args.out}.json", spec, {"system": sys_.name, "t": args.t, "est_error": result.est_error})


def eval_resolvent(args: argparse.Namespace) -> None:
    sys_ = _eval_system(args)
    spec = _eval_grid(args, sys_)
    p = None if args.sup else args.p
    unit = make_weight("unit")
    omega = growth_rate(sys_, unit, p)["omega"]
    lam = complex(omega + args.margin, args.lambda_im)
    query = ResolventQuery(sys=sys_, lam=lam, g=_input_field(args, sys_), theta1=unit, theta2=unit, p=p, grid=spec)
    result = apply_resolvent(query)
    write_grid_csv(args.out, result)
    write_grid_header(
        f"{args.out}.json",
        spec,
        {"system": sys_.name, "lambda": [lam.real, lam.imag], "omega": omega, "est_error": result.est_error},
    )


EVALUATORS = {
    "bounds": eval_bounds,
    "kernel": eval_kernel,
    "semigroup": eval_semigroup,
    "resolvent": eval_resolvent,
}


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        EVALUATORS[args.subject](args)
    except ConfigInvalid as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except OUKitError as e:
        logger.error(f"Evaluation of {args.subject} failed: {describe_error(e)}")
        return EXIT_FAILED
    except ValueError as e:
        logger.error(f"Invalid parameters for {args.subject}: {e}")
        return EXIT_CONFIG
    logger.info(f"Wrote {args.subject} evaluation to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ou-kit", description="Complex Ornstein-Uhlenbeck kernel toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="Run verification suites and write a report")
    verify.add_argument("--system", action="append", help=f"System file or bundled name {bundled_systems()}")
    verify.add_argument("--suite", action="append", help=f"Comma-separated suites from {SUITE_NAMES}")
    verify.add_argument("--out", help="Report directory")
    verify.add_argument("--seed", type=int)
    verify.add_argument("--tol", type=float, help="Relative slack of inequality checks")
    verify.add_argument("--grid", help="Grid spec min:max:count[,...]")
    verify.add_argument("--threads", type=int)
    verify.add_argument("--config", help="YAML file overriding the flags")
    verify.add_argument("--plan", help="Plan YAML file or bundled plan name")
    verify.set_defaults(handler=cmd_verify)

    evaluate = commands.add_parser("eval", help="Write evaluations as CSV")
    evaluate.add_argument("subject", choices=sorted(EVALUATORS))
    evaluate.add_argument("--system", default="scalar_heat")
    evaluate.add_argument("--out", required=True, help="CSV output path")
    evaluate.add_argument("--t", type=float, default=1.0)
    evaluate.add_argument("--t-min", type=float, default=1e-2)
    evaluate.add_argument("--t-max", type=float, default=1e2)
    evaluate.add_argument("--t-count", type=int, default=41)
    evaluate.add_argument("--eta", type=float, default=0.0)
    evaluate.add_argument("--p", type=float, default=2.0)
    evaluate.add_argument("--sup", action="store_true", help="Weighted sup norm instead of L^p")
    evaluate.add_argument("--C-theta", dest="C_theta", type=float, default=1.0)
    evaluate.add_argument("--vartheta", type=float, default=0.5)
    evaluate.add_argument("--axis", type=int, default=0)
    evaluate.add_argument("--r-max", type=float, default=5.0)
    evaluate.add_argument("--r-count", type=int, default=101)
    evaluate.add_argument("--grid", default="-5:5:41")
    evaluate.add_argument("--width", type=float, default=1.0, help="Width of the Gaussian input")
    evaluate.add_argument("--constant", type=complex, help="Constant input value instead of a Gaussian")
    evaluate.add_argument("--margin", type=float, default=0.5, help="Re lambda - omega")
    evaluate.add_argument("--lambda-im", type=float, default=0.0)
    evaluate.set_defaults(handler=cmd_eval)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(level=os.getenv("OU_KIT_LOG_LEVEL", "INFO").upper())
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
