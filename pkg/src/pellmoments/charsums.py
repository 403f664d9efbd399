#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
charsums.py: Complete character sums of the polynomials
P(l) = 16 u^2 l^2 + 8 a l + d(a, u), their closed form, and the counts of
admissible a per residue class of d(a, u).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import List, Optional
import logging
import math
import time
import numpy as np
import pandas as pd
from .arith import Factorization, factor_any, is_discriminant, is_square, kronecker
from .util import DomainError, ValidationError, ordered_map

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

BRUTEFORCE_M_MAX = 10**6
NI_U_MAX = 10**3
VERIFY_COLUMNS = ["m", "a", "u", "closed_num", "closed_den", "brute", "match"]
NI_COLUMNS = ["u", "r1", "eta", "N0", "N1", "N2", "N0_brute", "N1_brute", "N2_brute", "match"]


def residue_class(d: int) -> Optional[str]:
    """D0 for d = 0 mod 4, D1 for d = 1 mod 8, D2 for d = 5 mod 8, None otherwise."""
    if d % 4 == 0:
        return "D0"
    return {1: "D1", 5: "D2"}.get(d % 8)


@dataclass(frozen=True)
class CharSumCase:
    """
    Inputs (m, a, u) of the sum C_m = sum over l mod m of (P(l) | m).

    The derived fields are filled in from the factorization of m.
    """

    m: int
    a: int
    u: int
    m_fact: Factorization = field(init=False, repr=False)
    e1: int = field(init=False)
    m0: int = field(init=False)
    d_au: int = field(init=False)
    in_d: bool = field(init=False)
    residue_class: Optional[str] = field(init=False)

    def __post_init__(self):
        if self.m < 1 or self.u < 1:
            raise DomainError(f"need m >= 1 and u >= 1, got m={self.m}, u={self.u}")
        if not 2 < self.a <= 4 * self.u * self.u + 2:
            raise DomainError(f"a={self.a} outside (2, {4 * self.u * self.u + 2}]")
        numerator = self.a * self.a - 4
        if numerator % (self.u * self.u):
            raise DomainError(f"u^2={self.u * self.u} does not divide a^2 - 4 = {numerator}")
        m_fact = factor_any(self.m)
        d_au = numerator // (self.u * self.u)
        object.__setattr__(self, "m_fact", m_fact)
        object.__setattr__(self, "e1", m_fact.exponent(2))
        object.__setattr__(
            self, "m0", math.prod(p for p, e in m_fact.odd_factors if e % 2)
        )
        object.__setattr__(self, "d_au", d_au)
        object.__setattr__(self, "in_d", is_discriminant(d_au))
        object.__setattr__(self, "residue_class", residue_class(d_au))

    @property
    def omega_m0(self) -> int:
        return sum(1 for _, e in self.m_fact.odd_factors if e % 2)


@dataclass(frozen=True)
class NiCounts:
    u: int
    r1: int
    u0: int
    eta: int
    N0: int
    N1: int
    N2: int

    @property
    def counts(self):
        return (self.N0, self.N1, self.N2)


def poly_eval(case: CharSumCase, ell: int) -> int:
    """P(l) = 16 u^2 l^2 + 8 a l + d(a, u), which equals d(a + 4 u^2 l, u)."""
    return 16 * case.u * case.u * ell * ell + 8 * case.a * ell + case.d_au


def charsum_bruteforce(case: CharSumCase) -> int:
    """Sum of (P(l) | m) over l = 0 .. m-1."""
    if case.m > BRUTEFORCE_M_MAX:
        raise ValidationError(f"m={case.m} exceeds the brute-force guard {BRUTEFORCE_M_MAX}")
    return sum(kronecker(poly_eval(case, ell), case.m) for ell in range(case.m))


def _b_factor(case: CharSumCase) -> int:
    if case.e1 == 0:
        return 1
    if case.d_au % 4 == 0:
        return 0
    if case.d_au % 8 == 1:
        return 1
    return -1 if case.e1 % 2 else 1


def charsum_closed(case: CharSumCase) -> Fraction:
    """
    charsum_closed returns C_m / m as an exact fraction.

    Parameters
    ----------
    case : CharSumCase
        A case with d(a, u) a discriminant.

    Returns
    -------
    Fraction
        0 when gcd(m0, u) > 1, otherwise
        b(m) (-1)^omega(m0) / m0 prod_{e_j even} (1 - 2/p_j) prod_{p_j | u, e_j even} (1 + 1/(p_j - 2)).
    """
    if not case.in_d:
        raise DomainError(f"d({case.a},{case.u}) = {case.d_au} is not a discriminant")
    if math.gcd(case.m0, case.u) > 1:
        return Fraction(0)
    value = Fraction(_b_factor(case) * (-1) ** case.omega_m0, case.m0)
    for p, e in case.m_fact.odd_factors:
        if e % 2 == 0:
            value *= Fraction(p - 2, p)
            if case.u % p == 0:
                value *= Fraction(p - 1, p - 2)
    return value


def _two_adic(u: int):
    r1 = (u & -u).bit_length() - 1
    return r1, u >> r1


def ni_bruteforce(u: int) -> NiCounts:
    """
    ni_bruteforce counts 2 < a <= 4u^2 + 2 with d(a, u) in each residue class.

    Perfect squares d(a, u) are not discriminants and are skipped.
    """
    if not 1 <= u <= NI_U_MAX:
        raise ValidationError(f"u={u} outside the brute-force range [1, {NI_U_MAX}]")
    a = np.arange(3, 4 * u * u + 3, dtype=np.int64)
    numerator = a * a - 4
    admissible = numerator[numerator % (u * u) == 0] // (u * u)
    counts = {"D0": 0, "D1": 0, "D2": 0}
    for d in admissible.tolist():
        cls = residue_class(d)
        if cls is not None and not is_square(d):
            counts[cls] += 1
    r1, u0 = _two_adic(u)
    eta = len(factor_any(u0).factors)
    return NiCounts(u, r1, u0, eta, counts["D0"], counts["D1"], counts["D2"])


def ni_formula(u: int) -> NiCounts:
    """Closed-form counts, driven by the 2-adic valuation r1 of u and eta(u) = omega(odd part)."""
    if u < 1:
        raise DomainError(f"need u >= 1, got {u}")
    r1, u0 = _two_adic(u)
    eta = len(factor_any(u0).factors)
    unit = 2**eta
    n0 = (2 if r1 == 0 else 4 if r1 == 1 else 8) * unit
    n1 = 4 * unit if r1 >= 3 else 0
    n2 = 2 * unit if r1 == 0 else 4 * unit if r1 >= 3 else 0
    return NiCounts(u, r1, u0, eta, n0, n1, n2)


def bf_factors(m: int, u: int, counts: Optional[NiCounts] = None):
    """
    bf_factors returns (B_m(u), F_m(u), a(m)).

    B sums b(m) over the admissible a, a(m) is 4 for odd m and 2 (-1)^e1 for
    even m, and F = B / a(m) prod_{p_j | u, e_j even} (1 + 1/(p_j - 2)).
    """
    if m < 1:
        raise DomainError(f"need m >= 1, got {m}")
    counts = counts or ni_formula(u)
    m_fact = factor_any(m)
    e1 = m_fact.exponent(2)
    sign = (-1) ** e1
    if e1 == 0:
        b_sum, a_m = counts.N0 + counts.N1 + counts.N2, 4
    else:
        b_sum, a_m = counts.N1 + sign * counts.N2, 2 * sign
    f_value = Fraction(b_sum, a_m)
    for p, e in m_fact.odd_factors:
        if e % 2 == 0 and u % p == 0:
            f_value *= Fraction(p - 1, p - 2)
    return b_sum, f_value, a_m


def admissible_a(u: int) -> List[int]:
    """All 2 < a <= 4u^2 + 2 with u^2 | a^2 - 4 and d(a, u) a discriminant."""
    a = np.arange(3, 4 * u * u + 3, dtype=np.int64)
    candidates = a[(a * a - 4) % (u * u) == 0].tolist()
    return [c for c in candidates if is_discriminant((c * c - 4) // (u * u))]


def _verify_u(u: int, m_max: int) -> List[tuple]:
    rows = []
    for a in admissible_a(u):
        for m in range(1, m_max + 1):
            case = CharSumCase(m, a, u)
            closed = charsum_closed(case) * m
            brute = charsum_bruteforce(case)
            rows.append((m, a, u, closed.numerator, closed.denominator, brute, closed == brute))
    return rows


def verify_grid(m_max: int, u_max: int, threads: int = 1) -> pd.DataFrame:
    """
    verify_grid compares closed form and brute force on every (m, a, u).

    Rows are ordered by u, a, m and carry the closed value of C_m as a
    reduced fraction next to the brute-force sum.
    """
    if m_max < 1 or u_max < 1:
        raise ValidationError(f"need m_max, u_max >= 1, got {m_max}, {u_max}")
    started = time.perf_counter()
    blocks = ordered_map(partial(_verify_u, m_max=m_max), list(range(1, u_max + 1)), threads=threads, chunksize=1)
    df = pd.DataFrame([row for block in blocks for row in block], columns=VERIFY_COLUMNS)
    logger.info(
        "checked %d character sums (m <= %d, u <= %d): %d mismatches in %.2fs",
        len(df),
        m_max,
        u_max,
        int((~df["match"]).sum()),
        time.perf_counter() - started,
    )
    return df


def verify_ni(u_max: int, threads: int = 1) -> pd.DataFrame:
    """Compare ni_formula with ni_bruteforce for 1 <= u <= u_max."""
    formulas = [ni_formula(u) for u in range(1, u_max + 1)]
    brutes = ordered_map(ni_bruteforce, list(range(1, u_max + 1)), threads=threads, chunksize=8)
    rows = [
        (f.u, f.r1, f.eta, f.N0, f.N1, f.N2, b.N0, b.N1, b.N2, f.counts == b.counts)
        for f, b in zip(formulas, brutes)
    ]
    return pd.DataFrame(rows, columns=NI_COLUMNS)
