#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
forms.py: Class numbers of positive discriminants, computed exactly by
counting cycles of reduced indefinite forms and approximately through the
class number formula h(d) = sqrt(d) L(1, chi_d) / log eps_d.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, NamedTuple, Optional
import logging
import math
import time
import numpy as np
import scipy.special
from .arith import (
    DEFAULT_SPF_LIMIT,
    SpfTable,
    build_spf,
    divisors,
    divisor_dk_vector,
    factor_any,
    fundamental_part,
    is_discriminant,
    kronecker,
    kronecker_vector,
    primes_up_to,
)
from .pell import DiscriminantRecord, EnumerationRun
from .util import (
    ContractError,
    DomainError,
    UnreliableClassNumberError,
    ValidationError,
    exact_sum,
    ordered_map,
)

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

DEFAULT_Y = 10**4
DEFAULT_D_EXACT_MAX = 10**6
TAIL_EPS = 1e-12
UNRELIABLE_THRESHOLD = 0.35
# largest relative gap between the k-th power series and the k-th power of the L series
POWER_TOLERANCE = 1e-2
MODES = ("exact", "formula", "auto")
L_METHODS = ("erfc", "smoothed")
# terms of the erfc series vanish once pi n^2 / q exceeds this
_ERFC_CUTOFF = 40.0

_WORKER_STATE = None


@dataclass(frozen=True)
class QuadForm:
    """The binary quadratic form a x^2 + b x y + c y^2."""

    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def primitive(self) -> bool:
        return math.gcd(self.a, self.b, self.c) == 1

    def is_reduced(self, d: int) -> bool:
        """
        |sqrt(d) - 2|a|| < b < sqrt(d), decided in integers.

        The left inequality splits into d < (b + 2|a|)^2 and
        (2|a| - b <= 0 or (2|a| - b)^2 < d).
        """
        if self.discriminant != d or self.b <= 0 or self.b * self.b >= d:
            return False
        two_a = 2 * abs(self.a)
        if (self.b + two_a) ** 2 <= d:
            return False
        gap = two_a - self.b
        return gap <= 0 or gap * gap < d

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


@dataclass(frozen=True)
class LApprox:
    d: int
    k: float
    y: float
    value: float
    terms_used: int


class FormulaClassNumber(NamedTuple):
    h_real: float
    h_rounded: int
    unreliable: bool


def _require_discriminant(d: int) -> None:
    if not is_discriminant(d):
        raise DomainError(f"{d} is not a positive non-square discriminant")


def _divisors_of(n: int, table: Optional[SpfTable]) -> List[int]:
    return divisors(factor_any(n, table))


def reduced_forms(d: int, table: Optional[SpfTable] = None) -> List[QuadForm]:
    """
    reduced_forms lists the primitive reduced forms of discriminant d.

    For each 0 < b < sqrt(d) with b = d mod 2 the coefficients satisfy
    |a c| = (d - b^2) / 4 with a c < 0, so a runs over the signed divisors
    of that number.

    Parameters
    ----------
    d : int
        A positive non-square discriminant.
    table : Optional[SpfTable], optional
        Sieve used to factor (d - b^2) / 4 when in range.

    Returns
    -------
    List[QuadForm]
        Sorted by (b, a).
    """
    _require_discriminant(d)
    s = math.isqrt(d)
    found = []
    for b in range(2 - d % 2, s + 1, 2):
        n = (d - b * b) // 4
        for a in _divisors_of(n, table):
            candidate = QuadForm(a, b, -(n // a))
            if not candidate.is_reduced(d) or not candidate.primitive:
                continue
            found.append(candidate)
            found.append(QuadForm(-a, b, n // a))
    return sorted(found, key=lambda f: (f.b, f.a))


def rho_step(form: QuadForm, d: int) -> QuadForm:
    """
    rho_step maps a reduced form to its right neighbour (c, b', c').

    b' is the residue of -b modulo 2|c| in the window sqrt(d) - 2|c| < b' < sqrt(d),
    which for non-square d is [isqrt(d) - 2|c| + 1, isqrt(d)].
    """
    if not form.is_reduced(d):
        raise ContractError(f"{form} is not a reduced form of discriminant {d}")
    s = math.isqrt(d)
    modulus = 2 * abs(form.c)
    b_next = s - (s + form.b) % modulus
    c_next = (b_next * b_next - d) // (4 * form.c)
    return QuadForm(form.c, b_next, c_next)


def rho_cycles(d: int, table: Optional[SpfTable] = None) -> List[List[QuadForm]]:
    """Partition the reduced forms of d into rho-orbits, each starting at its smallest form."""
    forms = reduced_forms(d, table)
    members = set(forms)
    seen = set()
    cycles = []
    for start in forms:
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        current = rho_step(start, d)
        while current != start:
            if current not in members or current in seen:
                raise ContractError(f"rho orbit of {start} left the reduced forms of {d} at {current}")
            cycle.append(current)
            seen.add(current)
            current = rho_step(current, d)
        cycles.append(cycle)
    return cycles


def class_number_cycles(d: int, table: Optional[SpfTable] = None) -> int:
    """h(d) as the number of cycles of reduced forms."""
    return len(rho_cycles(d, table))


@lru_cache(maxsize=4)
def _primes_through(limit: int) -> np.ndarray:
    return primes_up_to(limit)


def _primes_at_least(n: int) -> np.ndarray:
    # round up so that the cache is shared between nearby limits
    return _primes_through(1 << max(10, int(n).bit_length()))


def smoothing_terms(y: float) -> int:
    """Number of terms N = ceil(y ln(y / TAIL_EPS)) used by l_smoothed."""
    return int(math.ceil(y * math.log(y / TAIL_EPS)))


@lru_cache(maxsize=8)
def _smoothing_weights(k: float, y: float) -> np.ndarray:
    n_max = smoothing_terms(y)
    n = np.arange(n_max + 1, dtype=np.float64)
    weights = divisor_dk_vector(k, n_max, _primes_at_least(n_max))
    weights[1:] *= np.exp(-n[1:] / y) / n[1:]
    weights[0] = 0.0
    weights.setflags(write=False)
    return weights


def l_smoothed(d: int, k: float, y: float) -> LApprox:
    """
    l_smoothed sums d_k(n) chi_d(n) / n e^(-n/y) over n <= N.

    Parameters
    ----------
    d : int
        A positive non-square discriminant.
    k : float
        Exponent, k > 0; the series approximates L(1, chi_d)^k.
    y : float
        Smoothing length, y >= 2.

    Returns
    -------
    LApprox
        The truncated series with the number of terms used.

    Raises
    ------
    ValidationError
        For k != 1 when the series differs from the k-th power of the k = 1
        series by more than POWER_TOLERANCE; a larger y is needed.
    """
    _require_discriminant(d)
    if k <= 0 or y < 2:
        raise ValidationError(f"need k > 0 and y >= 2, got k={k}, y={y}")
    weights = _smoothing_weights(float(k), float(y))
    n_max = len(weights) - 1
    chi = kronecker_vector(d, n_max, _primes_at_least(n_max))
    value = exact_sum(weights[chi != 0] * chi[chi != 0])
    if k != 1:
        base = exact_sum(_smoothing_weights(1.0, float(y))[chi != 0] * chi[chi != 0])
        gap = abs(value / base**k - 1.0) if base > 0 else math.inf
        if gap > POWER_TOLERANCE:
            raise ValidationError(
                f"d={d}: at y={y:g} the k={k} series is {gap:.2%} away from the k-th power of the k=1 series"
            )
    return LApprox(d, k, y, value, n_max)


def _l_primitive(d0: int) -> float:
    # L(1, chi) for the even primitive character of conductor d0:
    # sum chi(n) (erfc(n sqrt(pi/q)) / n + E1(pi n^2 / q) / sqrt(q))
    n_max = max(2, int(math.sqrt(_ERFC_CUTOFF * d0 / math.pi)) + 1)
    chi = kronecker_vector(d0, n_max, _primes_at_least(n_max))
    n = np.flatnonzero(chi).astype(np.float64)
    weights = scipy.special.erfc(n * math.sqrt(math.pi / d0)) / n
    weights += scipy.special.exp1(math.pi * n * n / d0) / math.sqrt(d0)
    return exact_sum(weights * chi[chi != 0])


def l_value(d: int, table: Optional[SpfTable] = None) -> float:
    """
    l_value returns L(1, chi_d) to double precision.

    The value is computed for the primitive character of the fundamental
    discriminant d0 of d = d0 f^2 by an exponentially convergent series of
    about 3.6 sqrt(d0) terms, then multiplied by prod over p | f of
    (1 - chi_d0(p) / p).
    """
    _require_discriminant(d)
    d0, f = fundamental_part(d, table)
    value = _l_primitive(d0)
    for p in factor_any(f, table).primes:
        value *= 1.0 - kronecker(d0, p) / p
    return value


def class_number_formula(rec: DiscriminantRecord, L: float) -> FormulaClassNumber:
    """
    class_number_formula inverts h = sqrt(d) L / log eps_d.

    Results further than UNRELIABLE_THRESHOLD from an integer, or rounding
    to less than 1, are flagged.
    """
    if not L > 0:
        raise DomainError(f"L(1, chi_{rec.d}) must be positive, got {L}")
    h_real = math.sqrt(rec.d) * L / rec.log_eps
    h_rounded = int(round(h_real))
    unreliable = abs(h_real - h_rounded) > UNRELIABLE_THRESHOLD or h_rounded < 1
    if unreliable:
        logger.warning("d=%d: formula class number %.4f is not near a positive integer", rec.d, h_real)
    return FormulaClassNumber(h_real, h_rounded, unreliable)


def _smoothed_estimate(rec: DiscriminantRecord, y: float, table: Optional[SpfTable]) -> FormulaClassNumber:
    estimate = class_number_formula(rec, l_smoothed(rec.d, 1, y).value)
    if estimate.unreliable:
        logger.info("d=%d: retrying with y=%g", rec.d, 10 * y)
        estimate = class_number_formula(rec, l_smoothed(rec.d, 1, 10 * y).value)
    reference = class_number_formula(rec, l_value(rec.d, table))
    if reference.h_rounded != estimate.h_rounded:
        logger.warning(
            "d=%d: smoothed series gives h=%.4f, the erfc series h=%.4f; keeping the latter, flagged",
            rec.d,
            estimate.h_real,
            reference.h_real,
        )
        return reference._replace(unreliable=True)
    return estimate


def class_number_hybrid(
    rec: DiscriminantRecord,
    mode: str = "auto",
    d_exact_max: int = DEFAULT_D_EXACT_MAX,
    y: float = DEFAULT_Y,
    l_method: str = "erfc",
    table: Optional[SpfTable] = None,
    strict: bool = False,
) -> DiscriminantRecord:
    """
    class_number_hybrid sets h on a record, exactly or by the formula.

    Parameters
    ----------
    rec : DiscriminantRecord
        The record to complete.
    mode : str, optional
        'exact' (cycle count), 'formula' or 'auto' (exact when d <= d_exact_max).
    d_exact_max : int, optional
        Largest d handled exactly in auto mode, by default 10^6.
    y : float, optional
        Smoothing length for l_method 'smoothed', by default 10^4; a flagged
        result is retried once with 10 y, and the rounding is checked
        against l_value.
    l_method : str, optional
        'erfc' (l_value) or 'smoothed' (l_smoothed), by default 'erfc'.
    table : Optional[SpfTable], optional
        Sieve used for factoring.
    strict : bool, optional
        Raise UnreliableClassNumberError instead of returning a flagged record.

    Returns
    -------
    DiscriminantRecord
        A copy with h, h_mode and flagged set.
    """
    _require_discriminant(rec.d)
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}, expected one of {MODES}")
    if l_method not in L_METHODS:
        raise ValidationError(f"unknown l_method {l_method!r}, expected one of {L_METHODS}")
    if mode == "exact" or (mode == "auto" and rec.d <= d_exact_max):
        return replace(rec, h=class_number_cycles(rec.d, table), h_mode="exact", flagged=False)
    if l_method == "erfc":
        estimate = class_number_formula(rec, l_value(rec.d, table))
    else:
        estimate = _smoothed_estimate(rec, y, table)
    if estimate.unreliable and strict:
        raise UnreliableClassNumberError(
            f"d={rec.d}: formula class number {estimate.h_real:.4f} is flagged unreliable"
        )
    return replace(rec, h=max(1, estimate.h_rounded), h_mode="formula", flagged=estimate.unreliable)


def _init_worker(limit: int, settings: dict) -> None:
    global _WORKER_STATE
    table = build_spf(limit) if limit >= 2 else None
    _WORKER_STATE = (table, settings)


def _hybrid_in_worker(rec: DiscriminantRecord) -> DiscriminantRecord:
    table, settings = _WORKER_STATE
    return class_number_hybrid(rec, table=table, **settings)


def assign_class_numbers(
    run: EnumerationRun,
    mode: str = "auto",
    d_exact_max: int = DEFAULT_D_EXACT_MAX,
    y: float = DEFAULT_Y,
    threads: int = 1,
    l_method: str = "erfc",
) -> EnumerationRun:
    """Return a copy of run with h set on every record, records processed in d order."""
    global _WORKER_STATE
    started = time.perf_counter()
    records = list(run.records)
    largest = max((r.d for r in records), default=0)
    exact_cap = {"exact": largest, "auto": min(largest, d_exact_max)}.get(mode, 0)
    limit = min(exact_cap // 4 + 1, DEFAULT_SPF_LIMIT)
    settings = dict(mode=mode, d_exact_max=d_exact_max, y=y, l_method=l_method)
    try:
        completed = ordered_map(
            _hybrid_in_worker,
            records,
            threads=threads,
            initializer=_init_worker,
            initargs=(limit, settings),
        )
    finally:
        _WORKER_STATE = None
    result = run.with_class_numbers(completed)
    mix = result.h_mode_mix()
    flagged = int(result.frame["flagged"].sum())
    if flagged:
        logger.warning("%d formula class numbers are flagged unreliable", flagged)
    logger.info(
        "class numbers for x=%d: %d exact, %d formula in %.2fs",
        run.x,
        mix["exact"],
        mix["formula"],
        time.perf_counter() - started,
    )
    return result


def h_log_eps_sum(run: EnumerationRun) -> float:
    """Sum of h(d) log eps_d over the run."""
    run.require_class_numbers()
    return exact_sum(run.frame["h"].astype(np.float64) * run.frame["log_eps"])
