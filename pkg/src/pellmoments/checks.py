#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""checks.py: The selftest suite: hand-derived values and exactness sweeps at CI scale."""

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Tuple
import itertools
import logging
import math
import tempfile
import time
from . import arith, charsums, constants, forms, moments, pell, tail
from .util import PellMomentsError

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

ORACLE_X = 2000
CHARSUM_M_MAX = 120
CHARSUM_U_MAX = 20
NI_U_MAX = 300
CONSTANTS_P = 10**5
RESIDUAL_K = (100, 200, 400)
SMOOTHED_SAMPLE_STEP = 100

_REGISTRY: Dict[str, Callable[[int], Tuple[bool, str]]] = {}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check(name: str):
    def register(function):
        _REGISTRY[name] = function
        return function

    return register


def _expect(pairs) -> Tuple[bool, str]:
    failures = [f"{label}: got {got!r}, expected {want!r}" for label, got, want in pairs if got != want]
    return not failures, "; ".join(failures) or f"{len(pairs)} values"


@check("arith.examples")
def _arith_examples(threads):
    table = arith.build_spf(100)
    return _expect(
        [
            ("kronecker(5,4)", arith.kronecker(5, 4), 1),
            ("kronecker(12,2)", arith.kronecker(12, 2), 0),
            ("kronecker(5,2)", arith.kronecker(5, 2), -1),
            ("factor(12)", arith.factor(12, table).factors, ((2, 2), (3, 1))),
            ("factor(45)", arith.factor(45, table).factors, ((3, 2), (5, 1))),
            ("squarefree_part(18)", arith.squarefree_part(18), 2),
            ("is_square(0)", arith.is_square(0), True),
            ("d_2(6)", arith.divisor_dk(2, 6), 4.0),
            ("d_0.5(4)", arith.divisor_dk(0.5, 4), 0.375),
        ]
    )


@check("pell.examples")
def _pell_examples(threads):
    run = pell.enumerate_run(10, threads=threads)
    with tempfile.TemporaryDirectory() as tmp:
        cached = pell.cache_read(pell.cache_write(run, Path(tmp) / "run10.cache"))
    return _expect(
        [
            ("within_bound(3,3)", pell.within_bound(3, 3), True),
            ("within_bound(11,10)", pell.within_bound(11, 10), False),
            ("d(6,2)", pell.discriminant_of_pair(6, 2), 8),
            ("d(4,2)", pell.discriminant_of_pair(4, 2), None),
            ("enumerate(10)", run.d_values, [5, 8, 12, 21, 24, 32, 45, 60, 77, 96]),
            ("pairs(10)", run.pair_count, 11),
            ("density(10)", pell.density_report(run), 1.0),
            ("enumerate(3)", pell.enumerate_run(3).d_values, [5]),
            ("cache round trip", cached == run, True),
        ]
    )


@check("forms.examples")
def _forms_examples(threads):
    Q = forms.QuadForm
    rec5 = pell.DiscriminantRecord(5, 3, 1, math.log((3 + math.sqrt(5)) / 2))
    return _expect(
        [
            ("reduced_forms(12)", set(forms.reduced_forms(12)), {Q(1, 2, -2), Q(-1, 2, 2), Q(2, 2, -1), Q(-2, 2, 1)}),
            ("reduced_forms(5)", set(forms.reduced_forms(5)), {Q(1, 1, -1), Q(-1, 1, 1)}),
            ("rho(1,2,-2)", forms.rho_step(Q(1, 2, -2), 12), Q(-2, 2, 1)),
            ("rho(-2,2,1)", forms.rho_step(Q(-2, 2, 1), 12), Q(1, 2, -2)),
            ("rho(1,1,-1)", forms.rho_step(Q(1, 1, -1), 5), Q(-1, 1, 1)),
            ("h(5), h(8), h(12)", [forms.class_number_cycles(d) for d in (5, 8, 12)], [1, 1, 2]),
            ("L(1,chi_5) smoothed", abs(forms.l_smoothed(5, 1, 10**4).value - 0.4304) <= 0.01, True),
            ("formula(5, 0.43041)", forms.class_number_formula(rec5, 0.43041)[1:], (1, False)),
            ("formula(5, 0.6)", forms.class_number_formula(rec5, 0.6).unreliable, True),
            ("hybrid formula d=5", forms.class_number_hybrid(rec5, "formula").h, 1),
        ]
    )


@check("forms.oracle_formula_agreement")
def _oracle_formula(threads):
    run = pell.enumerate_run(ORACLE_X, threads=threads)
    exact = forms.assign_class_numbers(run, mode="exact", threads=threads)
    formula = forms.assign_class_numbers(run, mode="formula", threads=threads)
    mismatches = [
        d
        for d, a, b in zip(exact.frame["d"], exact.frame["h"], formula.frame["h"])
        if int(a) != int(b)
    ]
    flagged = int(formula.frame["flagged"].sum())
    detail = f"{len(run)} records, {len(mismatches)} mismatches {mismatches[:5]}, {flagged} flagged"
    return not mismatches and not flagged, detail


@check("forms.smoothed_formula_agreement")
def _smoothed_formula(threads):
    run = pell.enumerate_run(ORACLE_X, threads=threads)
    table = arith.build_spf(ORACLE_X * ORACLE_X)
    sample = list(itertools.islice(run.records, 0, None, SMOOTHED_SAMPLE_STEP))
    mismatches, flagged = [], 0
    for rec in sample:
        estimate = forms.class_number_hybrid(rec, "formula", l_method="smoothed", table=table)
        flagged += estimate.flagged
        if estimate.h != forms.class_number_cycles(rec.d, table):
            mismatches.append(rec.d)
    return not mismatches, f"{len(sample)} records, {len(mismatches)} mismatches {mismatches[:5]}, {flagged} flagged"


@check("charsums.examples")
def _charsum_examples(threads):
    case = lambda m: charsums.CharSumCase(m, 3, 1)  # noqa: E731
    return _expect(
        [
            ("P(2)", charsums.poly_eval(case(1), 2), 117),
            ("C_3 brute", charsums.charsum_bruteforce(case(3)), -1),
            ("C_2 brute", charsums.charsum_bruteforce(case(2)), -2),
            ("C_1 brute", charsums.charsum_bruteforce(case(1)), 1),
            ("C_3/3", charsums.charsum_closed(case(3)), Fraction(-1, 3)),
            ("C_9/9", charsums.charsum_closed(case(9)), Fraction(1, 3)),
            ("ni(1)", charsums.ni_bruteforce(1).counts, (2, 0, 2)),
            ("ni_formula(24)", charsums.ni_formula(24).counts, (16, 8, 8)),
            ("bf(2,1)", charsums.bf_factors(2, 1), (-2, Fraction(1), -2)),
            ("bf(4,2)", charsums.bf_factors(4, 2)[:2], (0, Fraction(0))),
        ]
    )


@check("charsums.closed_form_exactness")
def _charsum_grid(threads):
    df = charsums.verify_grid(CHARSUM_M_MAX, CHARSUM_U_MAX, threads=threads)
    bad = df[~df["match"]]
    return bad.empty, f"{len(df)} cases, {len(bad)} mismatches"


@check("charsums.residue_counts")
def _ni_grid(threads):
    df = charsums.verify_ni(NI_U_MAX, threads=threads)
    bad = df[~df["match"]]
    return bad.empty, f"u <= {NI_U_MAX}, {len(bad)} mismatches {bad['u'].tolist()[:5]}"


@check("constants.examples")
def _constants_examples(threads):
    c0 = constants.C_of_k(0, 10**6)
    c50 = constants.C_of_k(50, 10**3)
    a0 = constants.A0_value().value
    checks = [
        ("g_1(3)", abs(constants.gk(3, 1) + 13 / 42) < 1e-15, True),
        ("g_1(2)", abs(constants.gk(2, 1) + 0.5 / (1 + 1 / 8 + 2 / 64 + 4 / 448)) < 1e-15, True),
        ("C(0)", abs(c0.value - 35 / 16) <= 1e-10, True),
        ("C(50)", 1 < c50.value < 1 + 1e-12, True),
        ("H_2(40)", abs(constants.local_H(2, 40) - 0.5) <= 1e-4, True),
        (
            "H_101(40)",
            abs(constants.local_H(101, 40) / constants.lemma_main_local(101, 40) - 1) <= 1e-8,
            True,
        ),
        (
            "H_3(1.5) series",
            abs(constants.local_H(3, 1.5) / constants.local_H_series(3, 1.5) - 1) <= 1e-10,
            True,
        ),
        ("A0", abs(a0 - 0.8187) <= 5e-4, True),
        ("H(1e-6)", abs(constants.H_of_k(1e-6, CONSTANTS_P).value - 35 / 16) <= 1e-4, True),
    ]
    return _expect(checks)


@check("constants.asymptotics")
def _constants_asymptotics(threads):
    residuals = [constants.asymptotic_residual(k) for k in RESIDUAL_K]
    log_h5 = constants.log_local_H(5, 1000) + 1000 * math.log(0.8)
    p = 10007
    log_h_large = constants.log_local_H(p, 100) - float(constants.log_cosh(100 / p))
    return _expect(
        [
            ("residual window", all(abs(r) <= 5 for r in residuals), True),
            ("residual spread", max(residuals) - min(residuals) <= 3, True),
            ("H_3(400)", abs(constants.log_local_H(3, 400) - math.log(2 / 3)) <= 1e-12, True),
            ("H_5(1000)", abs(log_h5) <= 2, True),
            ("H_10007(100)", abs(log_h_large) <= 10 * 100 / p**2, True),
            (
                "H_11(40)",
                abs(constants.local_H(11, 40) / constants.lemma_main_local(11, 40) - 1) <= 1e-8,
                True,
            ),
        ]
    )


@check("moments.examples")
def _moments_examples(threads):
    run = pell.enumerate_run(ORACLE_X, threads=threads)
    return _expect(
        [
            ("li(1e4)", abs(moments.li(1e4) - 1246.14) <= 0.01, True),
            ("li(2)", abs(moments.li(2) - 1.045) <= 0.001, True),
            ("k=0,m=1 empirical", moments.twisted_empirical(run, 0, 1), float(len(run))),
            (
                "k=0,m=1 predicted",
                abs(moments.twisted_predicted(ORACLE_X, 0, 1) / (35 / 16 * ORACLE_X) - 1) < 1e-10,
                True,
            ),
            ("integral k->0", abs(moments.moment_integral(1000, 1e-12) - 998) < 1e-6, True),
        ]
    )


@check("tail.examples")
def _tail_examples(threads):
    rec5 = pell.DiscriminantRecord(5, 3, 1, math.log((3 + math.sqrt(5)) / 2))
    rec8 = pell.DiscriminantRecord(8, 6, 2, math.log(3 + 2 * math.sqrt(2)))
    a0 = constants.A0_value().value
    return _expect(
        [
            ("E(5)", tail.E_of_d(rec5), Fraction(1, 2)),
            ("E(8)", tail.E_of_d(rec8), Fraction(3, 8)),
            ("N(A0)", abs(tail.predicted_tail(a0) - math.exp(-1 / a0)) < 1e-15, True),
            ("N(3)", abs(tail.predicted_tail(3) - 0.0523) < 5e-4, True),
            ("e^gamma/3", abs(tail.E_GAMMA_THIRD - 0.593691) < 1e-6, True),
        ]
    )


@check("tail.E_bound")
def _e_bound(threads):
    run = pell.enumerate_run(ORACLE_X, threads=threads)
    e_bad = tail.E_violations(run)
    u_bad = tail.small_u_character_violations(run)
    return not e_bad and not u_bad, f"{len(run)} records, E(d) > 1: {e_bad[:5]}, small-u: {u_bad[:5]}"


def check_names() -> List[str]:
    return list(_REGISTRY)


def run_selftest(threads: int = 1, only: List[str] = None) -> List[CheckResult]:
    """
    run_selftest executes the registered checks in registration order.

    A check that raises a package error counts as failed; its message
    becomes the detail.
    """
    results = []
    for name, function in _REGISTRY.items():
        if only and not any(name.startswith(prefix) for prefix in only):
            continue
        started = time.perf_counter()
        try:
            passed, detail = function(threads)
        except (PellMomentsError, ArithmeticError) as error:
            passed, detail = False, f"{type(error).__name__}: {error}"
        result = CheckResult(name, passed, detail, time.perf_counter() - started)
        logger.log(logging.INFO if passed else logging.ERROR, "%s %s: %s", "ok" if passed else "FAIL", name, detail)
        results.append(result)
    return results
