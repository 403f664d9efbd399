#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
tail.py: Large class numbers: the proportion of discriminants above a
tau-scaled threshold, extreme values of h(d) against the conditional
ceilings, and the quantity E(d) <= 1.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List
import logging
import math
import numpy as np
import pandas as pd
from .arith import kronecker
from .constants import EULER_GAMMA, A0_value
from .pell import DiscriminantRecord, EnumerationRun
from .util import DomainError, ValidationError

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

E_GAMMA_THIRD = math.exp(EULER_GAMMA) / 3.0
# records with log eps_d <= e, i.e. eps_d <= e^e, have log log eps_d <= 1
MIN_LOG_EPS = math.e
TAIL_COLUMNS = ["tau", "threshold", "count_above", "total", "empirical", "predicted"]
EXTREME_COLUMNS = ["rank", "d", "t", "u", "h", "ratio"]
REGIMES = ("GRH", "Littlewood")


@dataclass(frozen=True)
class TailReport:
    x: int
    tau: float
    threshold: float
    empirical_proportion: float
    predicted: float
    count_above: int
    total: int

    def to_row(self) -> dict:
        return {
            "tau": self.tau,
            "threshold": self.threshold,
            "count_above": self.count_above,
            "total": self.total,
            "empirical": self.empirical_proportion,
            "predicted": self.predicted,
        }

    @property
    def log_ratio(self) -> float:
        """log(empirical) / log(predicted); nan when nothing lies above the threshold."""
        if self.empirical_proportion <= 0:
            return float("nan")
        return math.log(self.empirical_proportion) / math.log(self.predicted)


@dataclass(frozen=True)
class ExtremeRecord:
    d: int
    t: int
    u: int
    h: int
    ratio: float


def tail_threshold(x: int, tau: float) -> float:
    """(e^gamma / 3) (x / log x) tau."""
    return E_GAMMA_THIRD * x / math.log(x) * tau


def predicted_tail(tau: float) -> float:
    """exp(-e^(tau - A0) / tau), the main term without its O(1/sqrt(tau)) factor."""
    if tau <= 0:
        raise ValidationError(f"tau must be positive, got {tau}")
    return math.exp(-math.exp(tau - A0_value().value) / tau)


def empirical_tail(run: EnumerationRun, tau: float) -> TailReport:
    """Proportion of records with h(d) >= tail_threshold(x, tau)."""
    if tau < 0.5:
        raise ValidationError(f"tau must be at least 0.5, got {tau}")
    run.require_class_numbers()
    if len(run) == 0:
        raise ValidationError("empty run")
    threshold = tail_threshold(run.x, tau)
    count = int((run.frame["h"].to_numpy(dtype=np.float64) >= threshold).sum())
    return TailReport(run.x, tau, threshold, count / len(run), predicted_tail(tau), count, len(run))


def tail_grid(run: EnumerationRun, taus: Iterable[float]) -> List[TailReport]:
    return [empirical_tail(run, tau) for tau in taus]


def tail_frame(reports: List[TailReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=TAIL_COLUMNS)


def extreme_scan(run: EnumerationRun, top_n: int) -> List[ExtremeRecord]:
    """
    extreme_scan ranks records by 3 h log eps / (e^gamma eps log log eps).

    Records with eps_d <= e^e are left out and counted in the log; ties are
    broken by the smaller d.
    """
    if top_n < 0:
        raise ValidationError(f"top_n must be non-negative, got {top_n}")
    run.require_class_numbers()
    frame = run.frame
    admissible = frame[frame["log_eps"] > MIN_LOG_EPS]
    excluded = len(frame) - len(admissible)
    if excluded:
        logger.info("extreme scan: %d records with eps_d <= e^e excluded", excluded)
    log_eps = admissible["log_eps"].to_numpy(dtype=np.float64)
    h = admissible["h"].to_numpy(dtype=np.float64)
    ratio = 3.0 * h * log_eps / (math.exp(EULER_GAMMA) * np.log(log_eps)) * np.exp(-log_eps)
    ranked = (
        pd.DataFrame({"d": admissible["d"].to_numpy(), "ratio": ratio}, index=admissible.index)
        .sort_values(["ratio", "d"], ascending=[False, True], kind="mergesort")
        .head(top_n)
    )
    return [
        ExtremeRecord(
            int(frame.at[i, "d"]),
            int(frame.at[i, "t"]),
            int(frame.at[i, "u"]),
            int(frame.at[i, "h"]),
            float(r),
        )
        for i, r in ranked["ratio"].items()
    ]


def extremes_frame(records: List[ExtremeRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [(rank, r.d, r.t, r.u, r.h, r.ratio) for rank, r in enumerate(records, start=1)],
        columns=EXTREME_COLUMNS,
    )


def E_of_d(rec: DiscriminantRecord) -> Fraction:
    """E(d) = 1/u_d (1 - chi_d(2)/2)^-1 (1 - chi_d(3)/3)^-1, exactly."""
    return (
        Fraction(1, rec.u)
        / (1 - Fraction(kronecker(rec.d, 2), 2))
        / (1 - Fraction(kronecker(rec.d, 3), 3))
    )


def E_violations(run: EnumerationRun) -> List[int]:
    """Discriminants with E(d) > 1."""
    return [rec.d for rec in run.records if E_of_d(rec) > 1]


def small_u_character_violations(run: EnumerationRun) -> List[int]:
    """Discriminants with u_d in {1, 2} and chi_d(2) = 1 or chi_d(3) = 1."""
    return [
        rec.d
        for rec in run.records
        if rec.u <= 2 and (kronecker(rec.d, 2) == 1 or kronecker(rec.d, 3) == 1)
    ]


def conditional_bounds(rec: DiscriminantRecord, regime: str = "GRH") -> float:
    """
    conditional_bounds returns the ceiling for h(d) in the given regime.

    GRH gives (2 e^gamma / 3) eps log log eps / log eps, the Littlewood
    regime half of it; the o(1) terms are dropped.

    Raises
    ------
    DomainError
        If eps_d <= e^e.
    """
    if regime not in REGIMES:
        raise ValidationError(f"unknown regime {regime!r}, expected one of {REGIMES}")
    if rec.log_eps <= MIN_LOG_EPS:
        raise DomainError(f"d={rec.d}: eps_d = {rec.eps:.4g} does not exceed e^e")
    factor = 2.0 * E_GAMMA_THIRD if regime == "GRH" else E_GAMMA_THIRD
    return factor * rec.eps * math.log(rec.log_eps) / rec.log_eps


def crude_bounds(rec: DiscriminantRecord, regime: str = "GRH") -> float:
    """The ceilings before the factor 3 saving: 2 e^gamma and e^gamma in place of 2 e^gamma / 3 and e^gamma / 3."""
    return 3.0 * conditional_bounds(rec, regime)
