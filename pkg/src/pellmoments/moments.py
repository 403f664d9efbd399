#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
moments.py: Empirical moment sums over the discriminants with eps_d <= x
and the main terms they are compared with.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Optional
import logging
import math
import time
import numpy as np
import pandas as pd
import scipy.integrate
import scipy.special
from .arith import kronecker
from .constants import C_of_k, H_of_k, gk
from .forms import DEFAULT_D_EXACT_MAX, DEFAULT_Y, assign_class_numbers, l_value
from .pell import EnumerationRun, enumerate_run
from .util import QuadratureError, ValidationError, exact_sum, ordered_map

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "x",
    "k",
    "m",
    "empirical",
    "predicted",
    "ratio",
    "exact_h_count",
    "formula_h_count",
    "seconds",
]
INTEGRAL_EPSREL = 1e-8


@dataclass(frozen=True)
class ClassNumberOptions:
    mode: str = "auto"
    d_exact_max: int = DEFAULT_D_EXACT_MAX
    y: float = DEFAULT_Y
    l_method: str = "erfc"


@dataclass
class MomentReport:
    """
    One comparison of an empirical sum with its predicted main term.

    A zero prediction leaves ratio undefined (nan); difference is always set.
    """

    x: int
    k: float
    m: int
    empirical: float
    predicted: float
    h_mode_mix: Dict[str, int] = field(default_factory=dict)
    runtime_s: float = 0.0
    simple_predicted: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.empirical / self.predicted if self.predicted else float("nan")

    @property
    def difference(self) -> float:
        return self.empirical - self.predicted

    def to_row(self, timings: bool = True) -> dict:
        return {
            "x": self.x,
            "k": self.k,
            "m": self.m,
            "empirical": self.empirical,
            "predicted": self.predicted,
            "ratio": self.ratio,
            "exact_h_count": self.h_mode_mix.get("exact", 0),
            "formula_h_count": self.h_mode_mix.get("formula", 0),
            "seconds": round(self.runtime_s, 3) if timings else 0.0,
        }


def moment_integral(x: float, k: float) -> float:
    """
    moment_integral returns the integral of (t / log t)^k over [2, x].

    Raises
    ------
    QuadratureError
        If quad cannot reach relative 1e-8.
    """
    if x < 3 or k < 0:
        raise ValidationError(f"need x >= 3 and k >= 0, got x={x}, k={k}")
    value, error = scipy.integrate.quad(
        lambda t: (t / math.log(t)) ** k, 2.0, float(x), epsrel=INTEGRAL_EPSREL, limit=500
    )
    if error > 10 * INTEGRAL_EPSREL * abs(value):
        raise QuadratureError(f"integral of (t/log t)^{k} up to {x} did not converge", error)
    return value


def main_term_integral(x: float, k: float, P: Optional[int] = None) -> float:
    """H(k) times the integral of (t / log t)^k over [2, x]."""
    return H_of_k(k, P).value * moment_integral(x, k)


def simple_main_term(x: float, k: float, P: Optional[int] = None) -> float:
    """H(k) / (k + 1) x^(k+1) / (log x)^k."""
    return H_of_k(k, P).value / (k + 1) * x ** (k + 1) / math.log(x) ** k


def empirical_moment(run: EnumerationRun, k: float) -> float:
    """Sum of h(d)^k over the run."""
    run.require_class_numbers()
    h = run.frame["h"].to_numpy(dtype=np.float64)
    return exact_sum(h**k)


def li(y: float) -> float:
    """Principal value logarithmic integral, li(y) = Ei(log y)."""
    if y < 2:
        raise ValidationError(f"li(y) is evaluated for y >= 2, got {y}")
    return float(scipy.special.expi(math.log(y)))


def average_order(x: float) -> float:
    """8 x / (35 log x), the mean of h(d) over eps_d <= x."""
    return 8.0 * x / (35.0 * math.log(x))


def _characters(d: np.ndarray, m: int) -> np.ndarray:
    # (d|m) depends on d mod 4m only
    period = 4 * m
    residues = d % period
    table = np.array([kronecker(r, m) for r in range(period)], dtype=np.int8)
    return table[residues]


def twisted_empirical(run: EnumerationRun, k: float, m: int) -> float:
    """Sum of chi_d(m) d^(k/2) over the run."""
    if m < 1:
        raise ValidationError(f"need m >= 1, got {m}")
    d = run.frame["d"].to_numpy(dtype=np.int64)
    chi = _characters(d, m)
    weights = np.exp(0.5 * k * np.log(d.astype(np.float64)))
    return exact_sum(chi[chi != 0] * weights[chi != 0])


def twisted_predicted(x: float, k: float, m: int, P: int = 10**6) -> float:
    """C(k) / (k + 1) g_k(m) x^(k+1)."""
    if k < 0 or m < 1:
        raise ValidationError(f"need k >= 0 and m >= 1, got k={k}, m={m}")
    return C_of_k(k, P).value / (k + 1) * gk(m, k) * float(x) ** (k + 1)


def moment_report(
    x: int,
    k: float,
    m: int = 1,
    h_options: ClassNumberOptions = ClassNumberOptions(),
    threads: int = 1,
    run: Optional[EnumerationRun] = None,
    P: Optional[int] = None,
) -> MomentReport:
    """
    moment_report runs one moment comparison end to end.

    Plain moments (m = 1, k > 0) need class numbers, which are assigned
    according to h_options unless the run already carries them; twisted
    sums and k = 0 only need the enumeration.

    Parameters
    ----------
    x : int
        Bound on eps_d.
    k : float
        Moment exponent.
    m : int, optional
        Twist, by default 1.
    h_options : ClassNumberOptions, optional
        How class numbers are obtained.
    threads : int, optional
        Worker processes, by default 1.
    run : Optional[EnumerationRun], optional
        A precomputed run for x (e.g. from the cache).
    P : Optional[int], optional
        Truncation prime bound for H(k).

    Returns
    -------
    MomentReport
        The comparison row.
    """
    started = time.perf_counter()
    if run is None:
        run = enumerate_run(x, threads=threads)
    elif run.x != x:
        raise ValidationError(f"run was enumerated for x={run.x}, not x={x}")
    simple = None
    if m == 1 and k > 0:
        if not run.has_class_numbers:
            run = assign_class_numbers(run, threads=threads, **asdict(h_options))
        empirical = empirical_moment(run, k)
        predicted = main_term_integral(x, k, P)
        simple = simple_main_term(x, k, P)
    else:
        empirical = twisted_empirical(run, k, m)
        predicted = twisted_predicted(x, k, m)
    report = MomentReport(
        x, k, m, empirical, predicted, run.h_mode_mix(), time.perf_counter() - started, simple
    )
    logger.info(
        "moment x=%d k=%g m=%d: empirical %.6g, predicted %.6g, ratio %.4f",
        x,
        k,
        m,
        empirical,
        predicted,
        report.ratio,
    )
    return report


def weighted_L_moment(run: EnumerationRun, k: float, threads: int = 1) -> MomentReport:
    """
    weighted_L_moment compares sum L(1, chi_d)^k d^(k/2) with H(k) / (k + 1) x^(k+1).

    This sum carries no log eps_d weights, so it isolates the L-value
    average from the regulator.
    """
    if k <= 0:
        raise ValidationError(f"need k > 0, got {k}")
    started = time.perf_counter()
    d = run.frame["d"].tolist()
    values = np.array(ordered_map(l_value, d, threads=threads), dtype=np.float64)
    weights = np.exp(0.5 * k * np.log(np.asarray(d, dtype=np.float64)))
    empirical = exact_sum(values**k * weights)
    predicted = H_of_k(k).value / (k + 1) * float(run.x) ** (k + 1)
    return MomentReport(run.x, k, 1, empirical, predicted, {}, time.perf_counter() - started)


def reports_frame(reports, timings: bool = True) -> pd.DataFrame:
    return pd.DataFrame([r.to_row(timings) for r in reports], columns=REPORT_COLUMNS)
