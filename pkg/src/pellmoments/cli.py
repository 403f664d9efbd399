#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
cli.py: Command-line front end. Each subcommand runs one experiment and
writes its report as CSV (or JSON with the same fields).

Exit status is 0 on success, 1 on invalid parameters and 2 when a
verification finds a counterexample.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence
import argparse
import logging
import math
import sys
import pandas as pd
from . import __version__
from .charsums import verify_grid, verify_ni
from .checks import run_selftest
from .constants import C_of_k, H_of_k, H_floor, asymptotic_residual, logH_asymp
from .forms import DEFAULT_D_EXACT_MAX, DEFAULT_Y, L_METHODS, MODES, assign_class_numbers, h_log_eps_sum
from .moments import ClassNumberOptions, li, moment_report, reports_frame
from .pell import (
    DEFAULT_MAX_X,
    EnumerationRun,
    cache_read,
    cache_write,
    density_report,
    enumerate_run,
    large_u_count,
    non_fundamental_pairs,
)
from .tail import E_violations, extreme_scan, extremes_frame, small_u_character_violations, tail_frame, tail_grid
from .util import InvariantFailure, PellMomentsError, ValidationError, write_report

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

COMMANDS = (
    "enumerate",
    "density",
    "moments",
    "twisted",
    "charsum-verify",
    "constants",
    "tail",
    "extremes",
    "selftest",
)
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT = 0, 1, 2


@dataclass
class RunConfig:
    """All parameters of one invocation; validate() runs before dispatch."""

    command: str
    x: int = 10**4
    k: float = 1.0
    m: int = 1
    y: float = DEFAULT_Y
    d_exact_max: int = DEFAULT_D_EXACT_MAX
    P: Optional[int] = None
    tau_grid: List[float] = field(default_factory=lambda: [1.0, 1.3, 1.6])
    threads: int = 1
    cache_path: Optional[Path] = None
    output: str = "csv"
    out_path: Optional[Path] = None
    mode: str = "auto"
    l_method: str = "erfc"
    m_max: int = 120
    u_max: int = 20
    ni_u_max: int = 300
    top_n: int = 20
    max_x: int = DEFAULT_MAX_X
    timings: bool = True

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not 3 <= self.x <= self.max_x:
            raise ValidationError(f"--x must lie in [3, {self.max_x}], got {self.x}")
        if self.k < 0:
            raise ValidationError(f"--k must be non-negative, got {self.k}")
        if self.command == "constants" and self.k > 0 and self.P is not None and self.P < H_floor(self.k):
            raise ValidationError(f"--P must be at least {H_floor(self.k)} for k={self.k}")
        if self.P is not None and self.P < 1000:
            raise ValidationError(f"--P must be at least 1000, got {self.P}")
        if self.m < 1:
            raise ValidationError(f"--m must be positive, got {self.m}")
        if self.y < 2:
            raise ValidationError(f"--y must be at least 2, got {self.y}")
        if self.d_exact_max < 0:
            raise ValidationError(f"--d-exact-max must be non-negative, got {self.d_exact_max}")
        if any(tau < 0.5 for tau in self.tau_grid):
            raise ValidationError(f"every --tau must be at least 0.5, got {self.tau_grid}")
        if self.threads < 1:
            raise ValidationError(f"--threads must be positive, got {self.threads}")
        if self.output not in ("csv", "json"):
            raise ValidationError(f"--output must be csv or json, got {self.output!r}")
        if self.mode not in MODES or self.l_method not in L_METHODS:
            raise ValidationError(f"bad class number options {self.mode!r}, {self.l_method!r}")
        if min(self.m_max, self.u_max, self.ni_u_max, self.top_n) < 1:
            raise ValidationError("--m-max, --u-max, --ni-u-max and --top must be positive")
        return self

    @property
    def h_options(self) -> ClassNumberOptions:
        return ClassNumberOptions(self.mode, self.d_exact_max, self.y, self.l_method)

    def report_path(self, suffix: str = "") -> Path:
        if self.out_path is not None:
            path = Path(self.out_path)
            return path.with_name(path.stem + suffix + path.suffix) if suffix else path
        return Path(f"{self.command}{suffix}.{self.output}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _load_run(config: RunConfig) -> EnumerationRun:
    if config.cache_path is not None and Path(config.cache_path).exists():
        run = cache_read(config.cache_path)
        if run.x != config.x:
            raise ValidationError(f"cache {config.cache_path} holds x={run.x}, not x={config.x}")
        logger.info("loaded %d records from %s", len(run), config.cache_path)
        return run
    run = enumerate_run(config.x, threads=config.threads, max_x=config.max_x)
    if config.cache_path is not None:
        cache_write(run, config.cache_path)
    return run


def _with_class_numbers(config: RunConfig, run: EnumerationRun) -> EnumerationRun:
    return assign_class_numbers(
        run,
        mode=config.mode,
        d_exact_max=config.d_exact_max,
        y=config.y,
        threads=config.threads,
        l_method=config.l_method,
    )


def _enumerate(config: RunConfig) -> None:
    run = _load_run(config)
    path = cache_write(run, config.report_path())
    print(f"{len(run)} discriminants with eps_d <= {config.x} written to {path}")


def _density(config: RunConfig) -> None:
    run = _load_run(config)
    if run.pair_count is None:
        logger.warning("the run carries no pair count; pairs and non_fundamental are left empty")
    df = pd.DataFrame(
        [
            {
                "x": run.x,
                "count": len(run),
                "pairs": run.pair_count,
                "non_fundamental": non_fundamental_pairs(run),
                "large_u": large_u_count(run, 0.5),
                "density": density_report(run),
                "predicted": 35 / 16,
            }
        ]
    )
    write_report(df, config.report_path(), config.output)


def _moments(config: RunConfig) -> None:
    run = _load_run(config)
    if config.k > 0:
        run = _with_class_numbers(config, run)
        logger.info(
            "sum of h(d) log eps_d = %.9g; li(x^2) = %.9g",
            h_log_eps_sum(run),
            li(float(config.x) ** 2),
        )
    report = moment_report(config.x, config.k, 1, config.h_options, config.threads, run, config.P)
    write_report(reports_frame([report], config.timings), config.report_path(), config.output)
    if report.simple_predicted is not None:
        ratio = report.empirical / report.simple_predicted
        logger.info("simple main term %.6g, ratio %.4f", report.simple_predicted, ratio)


def _twisted(config: RunConfig) -> None:
    run = _load_run(config)
    report = moment_report(config.x, config.k, config.m, config.h_options, config.threads, run)
    write_report(reports_frame([report], config.timings), config.report_path(), config.output)


def _charsum_verify(config: RunConfig) -> None:
    df = verify_grid(config.m_max, config.u_max, threads=config.threads)
    write_report(df, config.report_path(), config.output)
    ni = verify_ni(config.ni_u_max, threads=config.threads)
    write_report(ni, config.report_path("_ni"), config.output)
    bad = df[~df["match"]]
    bad_ni = ni[~ni["match"]]
    print(f"{len(bad)} mismatches in {len(df)} character sums, {len(bad_ni)} in residue counts")
    if len(bad) or len(bad_ni):
        raise InvariantFailure(
            "closed form disagrees with brute force",
            bad.to_dict("records")[:10] + bad_ni.to_dict("records")[:10],
        )


def _constants(config: RunConfig) -> None:
    k = config.k
    c = C_of_k(k, config.P or 10**6)
    row = {"k": k, "C": c.value, "H": math.nan, "logH": math.nan, "logH_asymp": math.nan, "residual": math.nan}
    tail_bound = c.tail_bound
    P = c.P
    if k > 0:
        h = H_of_k(k, config.P)
        row.update(H=h.value, logH=h.log_value)
        tail_bound, P = h.tail_bound, h.P
        if k >= 10:
            row["logH_asymp"] = logH_asymp(k)
            row["residual"] = asymptotic_residual(k, log_H=h.log_value)
    row.update(tail_bound=tail_bound, P=P)
    write_report(pd.DataFrame([row]), config.report_path(), config.output)


def _tail(config: RunConfig) -> None:
    run = _with_class_numbers(config, _load_run(config))
    write_report(tail_frame(tail_grid(run, config.tau_grid)), config.report_path(), config.output)


def _extremes(config: RunConfig) -> None:
    base = _load_run(config)
    e_bad = E_violations(base)
    u_bad = small_u_character_violations(base)
    run = _with_class_numbers(config, base)
    write_report(extremes_frame(extreme_scan(run, config.top_n)), config.report_path(), config.output)
    if e_bad or u_bad:
        raise InvariantFailure(
            f"{len(e_bad)} records with E(d) > 1, {len(u_bad)} small-u violations", e_bad[:10] + u_bad[:10]
        )


def _selftest(config: RunConfig) -> None:
    results = run_selftest(config.threads)
    for result in results:
        print(f"{'ok  ' if result.passed else 'FAIL'} {result.name} ({result.seconds:.1f}s): {result.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise InvariantFailure(f"{len(failed)} selftest checks failed", failed)


DISPATCH = {
    "enumerate": _enumerate,
    "density": _density,
    "moments": _moments,
    "twisted": _twisted,
    "charsum-verify": _charsum_verify,
    "constants": _constants,
    "tail": _tail,
    "extremes": _extremes,
    "selftest": _selftest,
}


def run(config: RunConfig) -> int:
    """Validate config, run its command and map errors to the exit status."""
    try:
        DISPATCH[config.validate().command](config)
    except InvariantFailure as failure:
        logger.error("%s", failure)
        for counterexample in failure.counterexamples:
            print(f"counterexample: {counterexample}")
        return EXIT_INVARIANT
    except PellMomentsError as error:
        logger.error("%s", error)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--x", type=int, default=10**4, help="bound on the fundamental unit")
    common.add_argument("--k", type=float, default=1.0, help="moment exponent")
    common.add_argument("--m", type=int, default=1, help="twist modulus")
    common.add_argument("--y", type=float, default=DEFAULT_Y, help="smoothing length of the L-series")
    common.add_argument("--d-exact-max", type=int, default=DEFAULT_D_EXACT_MAX)
    common.add_argument("--mode", choices=MODES, default="auto", help="class number method")
    common.add_argument("--l-method", choices=L_METHODS, default="erfc")
    common.add_argument("--P", type=int, default=None, help="truncation prime bound")
    common.add_argument("--tau", dest="tau_grid", type=float, nargs="+", default=[1.0, 1.3, 1.6])
    common.add_argument("--m-max", type=int, default=120)
    common.add_argument("--u-max", type=int, default=20)
    common.add_argument("--ni-u-max", type=int, default=300)
    common.add_argument("--top", dest="top_n", type=int, default=20)
    common.add_argument("--max-x", type=int, default=DEFAULT_MAX_X)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--cache", dest="cache_path", type=Path, default=None)
    common.add_argument("--output", choices=("csv", "json"), default="csv")
    common.add_argument("--out", dest="out_path", type=Path, default=None)
    common.add_argument("--no-timings", dest="timings", action="store_false", help="write 0 for seconds")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_const", const=logging.DEBUG, dest="loglevel")
    verbosity.add_argument("-q", "--quiet", action="store_const", const=logging.WARNING, dest="loglevel")

    parser = _Parser(prog="pellmoments", description="Moments of class numbers of indefinite binary quadratic forms")
    parser.add_argument("--version", action="version", version=f"pellmoments {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    commands.required = True
    for name in COMMANDS:
        commands.add_parser(name, parents=[common])
    return parser


def parse_args(args: Sequence[str]) -> argparse.Namespace:
    return build_parser().parse_args(args)


def setup_logging(loglevel: Optional[int]) -> None:
    logging.basicConfig(level=loglevel or logging.INFO, stream=sys.stderr, format=LOG_FORMAT)


def main(args: Sequence[str]) -> int:
    namespace = vars(parse_args(args))
    setup_logging(namespace.pop("loglevel"))
    config = RunConfig(**namespace)
    logger.info("pellmoments %s: %s", __version__, config.command)
    return run(config)


def run_from_command_line():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run_from_command_line()
