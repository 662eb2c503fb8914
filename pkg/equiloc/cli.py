"""
Batch runner: ``equiloc run`` executes checks on scenarios, ``equiloc list`` shows the
shipped scenarios.

Exit status is 0 when every verdict passes, 2 when a verdict fails or a scenario is
rejected, 1 on any other error.
"""

import argparse
import concurrent.futures
import json
import logging
import logging.config
import sys

import pandas as pd

from . import __version__, config
from .equivariant import Polynomial
from .errors import EquilocError, InapplicableCheckError
from .localization import corollary1_verify, lemma_suite, theorem1_verify, theorem2_verify
from .quadrature import MIN_RESOLUTION
from .scenarios import list_scenarios, resolve_scenario

logger = logging.getLogger(__name__)

CHECKS = ("lemmas", "theorem1", "corollary1", "theorem2")

# Polynomials of theorem 2 when none is given
DEFAULT_POLYNOMIALS = ("1", "x", "x^2")

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


def configure_logging(verbose=False):
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "verbose": {
                    "format": "{asctime} {levelname} {name}: {message}",
                    "style": "{",
                },
            },
            "handlers": {
                "stderr": {
                    "class": "logging.StreamHandler",
                    "formatter": "verbose",
                    "stream": "ext://sys.stderr",
                },
            },
            "loggers": {
                "equiloc": {
                    "handlers": ["stderr"],
                    "level": "DEBUG" if verbose else "INFO",
                    "propagate": False,
                },
            },
        }
    )


def _resolution(text):
    value = int(text)
    if value < MIN_RESOLUTION:
        raise argparse.ArgumentTypeError(f"resolution must be at least {MIN_RESOLUTION}")
    return value


def _positive(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {text}")
    return value


def _polynomial(text):
    try:
        Polynomial.parse(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))
    return text


def _s_values(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"s-values must be comma separated numbers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="equiloc",
        description="Numerically verify equivariant localization formulas on test manifolds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run checks on scenarios.")
    run.add_argument(
        "--scenario", action="append", required=True, help="Shipped scenario id or scenario file path (repeatable)."
    )
    run.add_argument(
        "--checks", nargs="+", default=["all"], choices=CHECKS + ("all",), help="Checks to run. Default: all."
    )
    run.add_argument(
        "--polynomial",
        action="append",
        type=_polynomial,
        help=f"Polynomial f in x for theorem2 (repeatable). Default: {', '.join(DEFAULT_POLYNOMIALS)}.",
    )
    run.add_argument("--resolution", type=_resolution, default=config.RESOLUTION, help="Quadrature nodes per axis.")
    run.add_argument("--residual-tol", type=_positive, default=config.RESIDUAL_TOL)
    run.add_argument("--integral-tol", type=_positive, default=config.INTEGRAL_TOL)
    run.add_argument(
        "--s-values", type=_s_values, default=list(config.S_VALUES), help="Comma separated s of the lemma 4 scan."
    )
    run.add_argument("--output", help="Write the reports here instead of stdout.")
    run.add_argument("--format", choices=("text", "json"), default="text")
    run.add_argument("--threads", type=int, default=config.THREADS, help="Worker threads. Default: EQUILOC_THREADS.")
    run.add_argument("--verbose", action="store_true", help="Log numerical details.")

    listing = subparsers.add_parser("list", help="List the shipped scenarios.")
    listing.add_argument("--verbose", action="store_true")
    return parser


def _selected_checks(checks):
    if "all" in checks:
        return list(CHECKS), True
    return [c for c in CHECKS if c in checks], False


def run_scenario(scenario_id, checks, options, skip_inapplicable=False):
    """All requested reports of one scenario, in check order.

    Parameters
    ----------
    scenario_id : `str`
    checks : `list` of `str`
    options : `argparse.Namespace`
        Resolution, tolerances, s-values, polynomials and thread count.
    skip_inapplicable : `bool`, optional
        Skip checks that do not cover the scenario (Corollary 1 with Y != 0) instead of
        raising. Failed hypotheses such as an undeclared commuting condition still raise.

    Returns
    -------
    reports : `list` of `equiloc.localization.LocalizationReport`
    """
    scenario = resolve_scenario(scenario_id)
    tolerances = {"residual_tol": options.residual_tol, "integral_tol": options.integral_tol}
    common = dict(resolution=options.resolution, threads=options.quadrature_threads, **tolerances)
    reports = []
    for check in checks:
        logger.info(f"running {check} on {scenario.id}")
        try:
            if check == "lemmas":
                reports.append(lemma_suite(scenario, s_values=options.s_values, **common))
            elif check == "theorem1":
                reports.append(theorem1_verify(scenario, **common))
            elif check == "corollary1":
                reports.append(corollary1_verify(scenario, **common))
            elif check == "theorem2":
                for f in options.polynomial or DEFAULT_POLYNOMIALS:
                    reports.append(theorem2_verify(scenario, Polynomial.parse(f), **common))
        except InapplicableCheckError as error:
            if not skip_inapplicable:
                raise
            logger.info(f"skipping {check} on {scenario.id}: {error}")
    return reports


def format_text(reports):
    """A summary table followed by the reason log of every report."""
    rows = [
        {
            "scenario": r.scenario,
            "check": r.check,
            "lhs": "" if r.lhs is None else f"{r.lhs:.10g}",
            "rhs": "" if r.rhs is None else f"{r.rhs:.10g}",
            "|lhs-rhs|": "" if r.difference is None else f"{r.difference:.3e}",
            "verdict": r.verdict,
        }
        for r in reports
    ]
    table = pd.DataFrame(rows, columns=["scenario", "check", "lhs", "rhs", "|lhs-rhs|", "verdict"])
    lines = [table.to_string(index=False), ""]
    for r in reports:
        lines.append(f"== {r.scenario} / {r.check}")
        lines.extend(f"   {note}" for note in r.notes)
    return "\n".join(lines) + "\n"


def format_json(reports):
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"


def run(options):
    """Execute ``equiloc run``.

    Scenarios run in parallel on ``options.threads`` workers; the reports are written once,
    in the order the scenarios were given.

    Returns
    -------
    status : `int`
    reports : `list` of `equiloc.localization.LocalizationReport`
    """
    checks, skip_inapplicable = _selected_checks(options.checks)
    threads = max(1, options.threads)
    # one level of parallelism at a time: across scenarios, or across quadrature blocks
    options.quadrature_threads = threads if len(options.scenario) == 1 else 1

    status = EXIT_PASS
    results = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(threads, len(options.scenario))) as executor:
        futures = [
            executor.submit(run_scenario, scenario_id, checks, options, skip_inapplicable)
            for scenario_id in options.scenario
        ]
        for scenario_id, future in zip(options.scenario, futures):
            try:
                results.append(future.result())
            except EquilocError as error:
                logger.error(f"scenario {scenario_id} rejected: {error}")
                status = EXIT_FAIL
    reports = [report for result in results for report in result]

    if any(not report.passed for report in reports):
        status = EXIT_FAIL
    text = format_json(reports) if options.format == "json" else format_text(reports)
    if options.output:
        with open(options.output, "w") as stream:
            stream.write(text)
        logger.info(f"wrote {len(reports)} reports to {options.output}")
    else:
        sys.stdout.write(text)
    return status, reports


def main(argv=None):
    options = build_parser().parse_args(argv)
    configure_logging(options.verbose)
    try:
        if options.command == "list":
            for scenario_id in list_scenarios():
                print(scenario_id)
            return EXIT_PASS
        status, _ = run(options)
    except EquilocError as error:
        logger.error(str(error))
        return EXIT_FAIL
    except Exception:
        logger.exception("internal error")
        return EXIT_ERROR
    logger.info(f"exit status {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
