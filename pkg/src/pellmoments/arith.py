#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
arith.py: Exact integer arithmetic shared by all experiments: the Kronecker
symbol, a smallest-prime-factor sieve with factorization, squarefree parts,
square tests and the real-order divisor function d_k.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Optional, Tuple
import logging
import math
import numpy as np
import sympy
from .util import DomainError, FactorizationRangeError, ValidationError

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

DEFAULT_SPF_LIMIT = 25_000_000

# (d|2) indexed by d mod 8
_KRONECKER_TWO = (0, 1, 0, -1, 0, -1, 0, 1)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization of n as (prime, exponent) pairs sorted by prime."""

    n: int
    factors: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if reduce(lambda acc, pe: acc * pe[0] ** pe[1], self.factors, 1) != self.n:
            raise ValueError(f"factors {self.factors} do not multiply to {self.n}")

    def exponent(self, p: int) -> int:
        for prime, exponent in self.factors:
            if prime == p:
                return exponent
        return 0

    @property
    def primes(self) -> List[int]:
        return [p for p, _ in self.factors]

    @property
    def odd_factors(self) -> List[Tuple[int, int]]:
        return [(p, e) for p, e in self.factors if p != 2]

    def __mul__(self, other: "Factorization") -> "Factorization":
        merged: Dict[int, int] = dict(self.factors)
        for p, e in other.factors:
            merged[p] = merged.get(p, 0) + e
        return Factorization(self.n * other.n, tuple(sorted(merged.items())))


@dataclass(frozen=True)
class SpfTable:
    """Smallest prime factor of every 2 <= n <= limit, in 32-bit cells."""

    limit: int
    spf: np.ndarray = field(repr=False, compare=False)

    def __contains__(self, n: int) -> bool:
        return 2 <= n <= self.limit

    def primes(self) -> np.ndarray:
        candidates = np.arange(self.spf.shape[0], dtype=np.int64)
        return candidates[2:][self.spf[2:] == candidates[2:]]


def build_spf(limit: int, memory_guard: int = DEFAULT_SPF_LIMIT) -> SpfTable:
    """
    build_spf sieves the smallest prime factor of every integer up to limit.

    Parameters
    ----------
    limit : int
        Largest integer the table can factor.
    memory_guard : int, optional
        Largest limit accepted, by default 2.5e7 (100 MB of int32 cells).

    Returns
    -------
    SpfTable
        The sieve.

    Raises
    ------
    ValidationError
        If limit exceeds the memory guard.
    """
    if limit > memory_guard:
        raise ValidationError(
            f"spf table of size {limit} exceeds the memory guard {memory_guard}; "
            "raise the guard or lower x"
        )
    limit = max(int(limit), 2)
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]  # view, assignment writes through
            block[block == 0] = p
    unmarked = np.flatnonzero(spf == 0)
    spf[unmarked] = unmarked
    spf[:2] = 0
    logger.debug("built spf table up to %d", limit)
    return SpfTable(limit, spf)


def primes_up_to(n: int) -> np.ndarray:
    """Return all primes <= n as an int64 array."""
    if n < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(n + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def factor(n: int, table: SpfTable) -> Factorization:
    """
    factor returns the prime factorization of n using the sieve.

    Raises
    ------
    FactorizationRangeError
        If n lies outside [2, table.limit].
    """
    if n == 1:
        return Factorization(1, ())
    if n not in table:
        raise FactorizationRangeError(f"{n} outside the spf table range [2, {table.limit}]")
    spf = table.spf
    original = n
    factors = []
    while n > 1:
        p = spf.item(n)
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        factors.append((p, e))
    return Factorization(original, tuple(factors))


def factor_any(n: int, table: Optional[SpfTable] = None) -> Factorization:
    """Factor n with the sieve when possible, with sympy beyond it."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    if n == 1:
        return Factorization(1, ())
    if table is not None and n in table:
        return factor(n, table)
    return Factorization(n, tuple(sorted(sympy.factorint(n).items())))


def divisors(fact: Factorization) -> List[int]:
    """Return the sorted divisors of the factorized integer."""
    result = [1]
    for p, e in fact.factors:
        result = [d * p**j for d in result for j in range(e + 1)]
    return sorted(result)


def kronecker(d: int, n: int) -> int:
    """
    kronecker evaluates the Kronecker symbol (d|n) for n >= 0.

    Parameters
    ----------
    d : int
        Upper argument, any integer.
    n : int
        Lower argument, non-negative.

    Returns
    -------
    int
        -1, 0 or 1.
    """
    if n < 0:
        raise DomainError(f"kronecker symbol needs n >= 0, got {n}")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    if d % 2 == 0 and n % 2 == 0:
        return 0
    v = (n & -n).bit_length() - 1
    n >>= v
    result = 1 if v % 2 == 0 else _KRONECKER_TWO[d & 7]
    # Jacobi symbol with n odd
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n & 7 in (3, 5):
                result = -result
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_vector(d: int, n_max: int, primes: np.ndarray) -> np.ndarray:
    """
    kronecker_vector returns chi_d(n) for 0 <= n <= n_max as an int8 array.

    The character is completely multiplicative, so only its values at primes
    are computed; for a discriminant d <= n_max the values are periodic modulo
    d and one period is tiled.

    Parameters
    ----------
    d : int
        A discriminant, d = 0 or 1 mod 4.
    n_max : int
        Largest argument.
    primes : np.ndarray
        All primes up to at least min(n_max, d).

    Returns
    -------
    np.ndarray
        chi[n] = (d|n).
    """
    if 0 < d <= n_max and d % 4 in (0, 1):
        period = kronecker_vector(d, d - 1, primes)
        return np.resize(period, n_max + 1)
    chi = np.ones(n_max + 1, dtype=np.int8)
    chi[0] = 0
    for p in primes:
        p = int(p)
        if p > n_max:
            break
        c = kronecker(d, p)
        if c == 1:
            continue
        if c == 0:
            chi[p::p] = 0
            continue
        q = p
        while q <= n_max:
            chi[q::q] *= -1
            q *= p
    return chi


def squarefree_part(n: int, table: Optional[SpfTable] = None) -> int:
    """Product of the primes dividing n to an odd power."""
    if n < 1:
        raise DomainError(f"squarefree part needs n >= 1, got {n}")
    return reduce(lambda acc, pe: acc * pe[0] if pe[1] % 2 else acc, factor_any(n, table).factors, 1)


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def is_discriminant(d: int) -> bool:
    """True iff d > 0, d = 0 or 1 mod 4 and d is not a perfect square."""
    return d > 0 and d % 4 in (0, 1) and not is_square(d)


def fundamental_part(d: int, table: Optional[SpfTable] = None) -> Tuple[int, int]:
    """
    fundamental_part splits a discriminant as d = d0 * f**2 with d0 fundamental.

    Parameters
    ----------
    d : int
        A positive non-square discriminant.
    table : Optional[SpfTable], optional
        Sieve used for factoring when d is in range.

    Returns
    -------
    Tuple[int, int]
        (d0, f).
    """
    if not is_discriminant(d):
        raise DomainError(f"{d} is not a positive non-square discriminant")
    s = squarefree_part(d, table)
    d0 = s if s % 4 == 1 else 4 * s
    f = math.isqrt(d // d0)
    return d0, f


def divisor_dk(k: float, n: int, table: Optional[SpfTable] = None) -> float:
    """
    divisor_dk evaluates the k-th divisor function d_k(n) for real k > 0.

    d_k(p^a) is built by the recurrence d_k(p^a) = d_k(p^(a-1)) (k+a-1)/a,
    which equals Gamma(k+a)/(Gamma(k) a!) without evaluating Gamma.
    """
    if k <= 0 or n < 1:
        raise ValidationError(f"d_k(n) needs k > 0 and n >= 1, got k={k}, n={n}")
    value = 1.0
    for _, e in factor_any(n, table).factors:
        local = 1.0
        for a in range(1, e + 1):
            local *= (k + a - 1) / a
        value *= local
    return value


def divisor_dk_vector(k: float, n_max: int, primes: np.ndarray) -> np.ndarray:
    """Return d_k(n) for 0 <= n <= n_max (entry 0 is unused)."""
    if k <= 0:
        raise ValidationError(f"d_k(n) needs k > 0, got k={k}")
    dk = np.ones(n_max + 1, dtype=np.float64)
    if k == 1:
        return dk
    for p in primes:
        p = int(p)
        if p > n_max:
            break
        q, a = p, 1
        while q <= n_max:
            # multiples of p^a already carry d_k(p^(a-1))
            dk[q::q] *= (k + a - 1) / a
            q *= p
            a += 1
    return dk
