#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
constants.py: The constants of the moment asymptotics: the multiplicative
weights g_k, the Euler products C(k) and H(k) with certified truncation,
the integral constant A0 and the large-k asymptotics of log H(k).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional
import logging
import math
import mpmath
import numpy as np
import scipy.integrate
import scipy.special
from .arith import divisor_dk_vector, factor_any, primes_up_to
from .util import QuadratureError, ValidationError, exact_sum

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286
P_MIN = 1000
# exp(-x) for x beyond this is treated as 0
_EXP_CUTOFF = 700.0
_ROUNDING = 1e-13


@dataclass(frozen=True)
class ConstantEval:
    """
    An evaluated constant with its truncation bound.

    For products that overflow a double, value is inf and log_value carries
    the result; tail_bound bounds |true - value|.
    """

    k: float
    P: int
    value: float
    tail_bound: float
    method: str
    log_value: float = float("nan")

    @property
    def relative_error(self) -> float:
        return self.tail_bound / self.value if self.value else float("inf")


@dataclass(frozen=True)
class A0Eval:
    value: float
    quadrature_error: float


@lru_cache(maxsize=8)
def _primes(limit: int) -> np.ndarray:
    return primes_up_to(limit)


def _inv_pow_minus_one(p: float, s: float) -> float:
    """1 / (p^s - 1), flushed to 0 once p^s overflows."""
    x = s * math.log(p)
    return 0.0 if x > _EXP_CUTOFF else 1.0 / math.expm1(x)


def _two_q(s: float) -> float:
    # 1 / (4^s (2^s - 1))
    x = s * math.log(4.0)
    return 0.0 if x > _EXP_CUTOFF else math.exp(-x) * _inv_pow_minus_one(2, s)


def two_factor(k: float) -> float:
    """The explicit 2-factor 1 + 2^-s + 2 4^-s + 4 / (4^s (2^s - 1)) of C(k), s = k + 2."""
    s = k + 2
    return 1.0 + 2.0**-s + 2.0 * 4.0**-s + 4.0 * _two_q(s)


def odd_factor(p: int, k: float) -> float:
    """1 + 2 / (p^(k+2) - 1)."""
    return 1.0 + 2.0 * _inv_pow_minus_one(p, k + 2)


def gk_prime_power(p: int, a: int, k: float) -> float:
    if a == 0:
        return 1.0
    s = k + 2
    if p == 2:
        sign = -1.0 if a % 2 else 1.0
        return sign / 2.0 * (1.0 + 2.0 * (1.0 + sign) * _two_q(s)) / two_factor(k)
    e = _inv_pow_minus_one(p, s)
    c_p = 1.0 + 2.0 * e
    if a % 2:
        return -1.0 / (p * c_p)
    return (1.0 - 2.0 / p) * (1.0 + 2.0 * (p - 1) * e / (p - 2)) / c_p


def gk(m: int, k: float) -> float:
    """
    gk evaluates the multiplicative weight g_k(m) of the twisted sums.

    Parameters
    ----------
    m : int
        Positive integer.
    k : float
        Exponent, k >= 0.

    Returns
    -------
    float
        Product of g_k(p^a) over the prime powers exactly dividing m.
    """
    if m < 1 or k < 0:
        raise ValidationError(f"need m >= 1 and k >= 0, got m={m}, k={k}")
    return math.prod(gk_prime_power(p, a, k) for p, a in factor_any(m).factors)


def prime_zeta_tail(s: float, P: int, primes: Optional[np.ndarray] = None) -> float:
    """
    prime_zeta_tail returns the sum of p^-s over primes p > P.

    The prime zeta function comes from mpmath; the head is summed exactly.
    """
    if s <= 1:
        raise ValidationError(f"prime zeta diverges at s={s}")
    if s * math.log(P) > _EXP_CUTOFF:
        return 0.0
    primes = _primes(P) if primes is None else primes[primes <= P]
    head = exact_sum(np.exp(-s * np.log(primes.astype(np.float64))))
    return max(0.0, float(mpmath.primezeta(s)) - head)


def _log_c_tail(k: float, P: int, primes: np.ndarray) -> float:
    # sum over p > P of log((p^s + 1)/(p^s - 1)) = 2 sum_{j odd} P_s(j s) / j
    s = k + 2
    return 2.0 * (prime_zeta_tail(s, P, primes) + prime_zeta_tail(3 * s, P, primes) / 3.0)


def _c_neglected(k: float, P: int) -> float:
    s = k + 2
    x = (5 * s - 1) * math.log(P)
    return 0.0 if x > _EXP_CUTOFF else 4.0 * math.exp(-x) / (5.0 * (5 * s - 1) * math.log(P))


def C_of_k(k: float, P: int = 10**6) -> ConstantEval:
    """
    C_of_k evaluates C(k) as the 2-factor times the product over odd p <= P.

    The factors beyond P are restored through prime zeta tails, so the
    remaining error is of order P^(-5(k+2)).

    Parameters
    ----------
    k : float
        k >= 0.
    P : int, optional
        Truncation prime bound, at least 1000, by default 10^6.

    Returns
    -------
    ConstantEval
        method 'euler_product'.
    """
    if k < 0:
        raise ValidationError(f"C(k) needs k >= 0, got {k}")
    if P < P_MIN:
        raise ValidationError(f"P={P} is below the floor {P_MIN}")
    primes = _primes(P)
    odd = primes[1:].astype(np.float64)
    s = k + 2
    x = s * np.log(odd)
    small = np.where(x > _EXP_CUTOFF, 0.0, 2.0 / np.expm1(np.minimum(x, _EXP_CUTOFF)))
    log_product = exact_sum(np.log1p(small)) + _log_c_tail(k, P, primes)
    value = two_factor(k) * math.exp(log_product)
    bound = value * (_c_neglected(k, P) + _ROUNDING)
    logger.debug("C(%g) = %.17g with P=%d", k, value, P)
    return ConstantEval(k, P, value, bound, "euler_product", math.log(value))


def _local_coefficients(p: int, k: float):
    if p == 2:
        s = k + 2
        q = _two_q(s)
        return two_factor(k) - (1.0 + 4.0 * q) / 2.0, q, 0.5 + q
    # expanded so that no coefficient is a difference of nearly equal terms;
    # at p = 3 the (1 - 1/p)^-k coefficient is 2e/3 and is multiplied by 1.5^k
    e = _inv_pow_minus_one(p, k + 2)
    return 2.0 * (1.0 + e) / p, (p - 3) / (2.0 * p) + (p - 1) * e / p, (p - 1) / (2.0 * p) + (p - 1) * e / p


def log_local_H(p: int, k: float) -> float:
    """
    log_local_H returns log H_p(k) in closed form.

    With S_(+/-) = ((1 - 1/p)^-k +/- (1 + 1/p)^-k) / 2 the local series
    sum_a d_k(p^a) g_k(p^a) / p^a is linear in (1 - 1/p)^-k and (1 + 1/p)^-k;
    multiplied by the C(k) factor of p it becomes
    alpha + beta (1 - 1/p)^-k + gamma (1 + 1/p)^-k, evaluated in log space.
    """
    if k <= 0:
        raise ValidationError(f"H_p(k) needs k > 0, got {k}")
    alpha, beta, gamma = _local_coefficients(p, k)
    exponents = np.array([0.0, -k * math.log1p(-1.0 / p), -k * math.log1p(1.0 / p)])
    weights = np.array([alpha, beta, gamma])
    keep = weights > 0
    return float(scipy.special.logsumexp(exponents[keep], b=weights[keep]))


def local_H(p: int, k: float) -> float:
    return math.exp(log_local_H(p, k))


def local_H_series(p: int, k: float, rel: float = 1e-16, max_terms: int = 100_000) -> float:
    """Direct summation of the local series times the C(k) factor of p."""
    c_p = two_factor(k) if p == 2 else odd_factor(p, k)
    total, weight = 1.0, 1.0
    terms = [1.0]
    for a in range(1, max_terms):
        weight *= (k + a - 1) / (a * p)
        term = weight * gk_prime_power(p, a, k)
        terms.append(term)
        total += term
        if abs(term) < rel * abs(total) and a > k:
            break
    return c_p * exact_sum(terms)


def lemma_main_local(p: int, k: float) -> float:
    """Large-k main expression of H_p(k): 1/2 for p = 2, the (1 -/+ 1/p)^-k combination otherwise."""
    if p == 2:
        return 0.5
    return (
        (0.5 - 1.5 / p) * (1.0 - 1.0 / p) ** -k
        + (0.5 - 0.5 / p) * (1.0 + 1.0 / p) ** -k
        + 2.0 / p
    )


def H_floor(k: float) -> int:
    return int(max(P_MIN, math.ceil(10 * k * k)))


def default_P(k: float) -> int:
    return int(max(10**5, math.ceil(10 * k * k)))


def H_of_k(k: float, P: Optional[int] = None) -> ConstantEval:
    """
    H_of_k evaluates H(k) = prod_p H_p(k) over p <= P with a tail correction.

    For p > P, log H_p(k) = log of the C(k) factor + (k^2 - k) / (2 p^2) + O(k^2/p^3);
    both leading sums are restored through prime zeta tails and the
    neglected part is bounded by (k+1)^3 / (P^2 log P).

    Parameters
    ----------
    k : float
        k > 0.
    P : Optional[int], optional
        Truncation prime bound, at least max(1000, 10 k^2); by default
        max(10^5, 10 k^2).

    Returns
    -------
    ConstantEval
        method 'euler_product'; value is inf when H(k) exceeds a double, see log_value.
    """
    if k <= 0:
        raise ValidationError(f"H(k) needs k > 0, got {k}")
    floor = H_floor(k)
    P = default_P(k) if P is None else int(P)
    if P < floor:
        raise ValidationError(f"P={P} is below the floor max(1000, 10 k^2) = {floor} for k={k}")
    primes = _primes(P)
    logs = [log_local_H(int(p), k) for p in primes]
    tail = _log_c_tail(k, P, primes) + (k * k - k) / 2.0 * prime_zeta_tail(2, P, primes)
    log_value = exact_sum(logs) + tail
    log_error = (k + 1) ** 3 / (P * P * math.log(P)) + _c_neglected(k, P) + _ROUNDING
    if log_value < _EXP_CUTOFF:
        value = math.exp(log_value)
        bound = value * math.expm1(log_error)
    else:
        value = bound = float("inf")
    logger.debug("log H(%g) = %.17g with P=%d", k, log_value, P)
    return ConstantEval(k, P, value, bound, "euler_product", log_value)


def _g_vector(k: float, n_max: int, primes: np.ndarray) -> np.ndarray:
    g = np.ones(n_max + 1, dtype=np.float64)
    for p in primes:
        p = int(p)
        if p > n_max:
            break
        q, a, previous = p, 1, 1.0
        while q <= n_max:
            current = gk_prime_power(p, a, k)
            g[q::q] *= current / previous
            previous = current
            q *= p
            a += 1
    return g


def direct_H(k: float, M: int = 10**6) -> ConstantEval:
    """
    direct_H sums C(k) sum_{m <= M} d_k(m) g_k(m) / m directly.

    The series converges slowly (the squares m = n^2 contribute about
    1/sqrt(M)); tail_bound is twice the change of the partial sum between
    M/4 and M.
    """
    if k <= 0 or M < 16:
        raise ValidationError(f"need k > 0 and M >= 16, got k={k}, M={M}")
    primes = _primes(M)
    n = np.arange(M + 1, dtype=np.float64)
    terms = divisor_dk_vector(k, M, primes) * _g_vector(k, M, primes)
    terms[1:] /= n[1:]
    terms[0] = 0.0
    c_value = C_of_k(k, max(P_MIN, min(M, 10**6))).value
    full = exact_sum(terms)
    quarter = exact_sum(terms[: M // 4 + 1])
    value = c_value * full
    bound = 2.0 * c_value * abs(full - quarter) + _ROUNDING * abs(value)
    return ConstantEval(k, M, value, bound, "direct_series", math.log(value))


def log_cosh(t):
    """log cosh t without overflow, elementwise."""
    t = np.abs(t)
    return t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0)


def f_value(t: float) -> float:
    """log cosh t for t < 1 and log cosh t - t for t >= 1."""
    if t < 0:
        raise ValidationError(f"f(t) needs t >= 0, got {t}")
    value = float(log_cosh(t))
    return value - t if t >= 1 else value


def _head_integrand(t: float) -> float:
    if t < 1e-3:
        t2 = t * t
        return 0.5 - t2 / 12.0 + t2 * t2 / 45.0
    return float(log_cosh(t)) / (t * t)


def _tail_integrand(t: float) -> float:
    # (log cosh t - t + log 2) / t^2
    return math.log1p(math.exp(-2.0 * t)) / (t * t)


@lru_cache(maxsize=1)
def A0_value(tolerance: float = 1e-10) -> A0Eval:
    """
    A0_value integrates A0 = int_0^1 f(t)/t^2 dt + int_1^inf f(t)/t^2 dt + 1.

    On [1, inf) the integrand is (log(1 + e^-2t) - log 2) / t^2; the
    constant part integrates to -log 2 exactly.

    Raises
    ------
    QuadratureError
        If either quadrature misses the tolerance.
    """
    head, head_error = scipy.integrate.quad(_head_integrand, 0.0, 1.0, epsabs=tolerance, limit=200)
    tail, tail_error = scipy.integrate.quad(_tail_integrand, 1.0, np.inf, epsabs=tolerance, limit=200)
    error = head_error + tail_error
    if error > 10 * tolerance:
        raise QuadratureError("A0 quadrature did not converge", error)
    return A0Eval(head + tail - math.log(2.0) + 1.0, error)


def logH_asymp(k: float) -> float:
    """k log log k + k (gamma - log 3) + (A0 - 1) k / log k."""
    if k < 10:
        raise ValidationError(f"the asymptotic form needs k >= 10, got {k}")
    log_k = math.log(k)
    return k * math.log(log_k) + k * (EULER_GAMMA - math.log(3.0)) + (A0_value().value - 1.0) * k / log_k


def asymptotic_residual(k: float, P: Optional[int] = None, log_H: Optional[float] = None) -> float:
    """
    (log H(k) - logH_asymp(k)) (log k)^2 / k.

    The asymptotic form leaves an O(k / (log k)^2) error, so the residual
    stays bounded as k grows. log_H, when given, replaces the evaluation of
    H_of_k(k, P).
    """
    if log_H is None:
        log_H = H_of_k(k, P).log_value
    return (log_H - logH_asymp(k)) * math.log(k) ** 2 / k


def Hp_asymp(p: int, k: float) -> float:
    """Main term of log H_p(k): -k log(1 - 1/p) for p <= k^(2/3), log cosh(k/p) beyond."""
    if p < 5 or k < 10:
        raise ValidationError(f"need p >= 5 and k >= 10, got p={p}, k={k}")
    if p <= k ** (2.0 / 3.0):
        return -k * math.log1p(-1.0 / p)
    return float(log_cosh(k / p))
