# -*- coding: utf-8 -*-
import numpy as np
import pytest
import sympy
from pellmoments.arith import (
    Factorization,
    build_spf,
    divisor_dk,
    divisor_dk_vector,
    divisors,
    factor,
    factor_any,
    fundamental_part,
    is_discriminant,
    is_square,
    kronecker,
    kronecker_vector,
    primes_up_to,
    squarefree_part,
)
from pellmoments.util import DomainError, FactorizationRangeError, ValidationError

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


def test_kronecker_examples():
    assert kronecker(5, 4) == 1
    assert kronecker(12, 2) == 0
    assert kronecker(5, 2) == -1
    assert kronecker(1, 0) == 1
    assert kronecker(-1, 0) == 1
    assert kronecker(2, 0) == 0
    assert kronecker(7, 1) == 1


def test_kronecker_agrees_with_jacobi_on_odd_n():
    for n in range(1, 80, 2):
        for d in range(-40, 41):
            assert kronecker(d, n) == sympy.jacobi_symbol(d, n), (d, n)


def test_kronecker_at_two():
    expected = {1: 1, 7: 1, 3: -1, 5: -1}
    for d in range(-30, 31):
        want = 0 if d % 2 == 0 else expected[d % 8]
        assert kronecker(d, 2) == want


def test_kronecker_is_multiplicative_in_n():
    for d in (5, 8, 12, 13, 21, -3, -4):
        for m in range(1, 25):
            for n in range(1, 25):
                assert kronecker(d, m * n) == kronecker(d, m) * kronecker(d, n)


def test_kronecker_negative_n():
    with pytest.raises(DomainError):
        kronecker(5, -1)


def test_kronecker_vector_matches_scalar():
    primes = primes_up_to(300)
    for d in (5, 8, 12, 13, 17, 21, 24, 60, 77, 229, 1000):
        chi = kronecker_vector(d, 250, primes)
        assert chi.dtype == np.int8
        assert chi.tolist() == [kronecker(d, n) for n in range(251)], d


def test_build_spf(spf_small):
    assert spf_small.limit == 1000
    for n in range(2, 1001):
        assert spf_small.spf[n] == min(sympy.factorint(n)), n
    assert spf_small.primes().tolist() == primes_up_to(1000).tolist()
    assert 1000 in spf_small
    assert 1 not in spf_small
    assert 1001 not in spf_small


def test_build_spf_memory_guard():
    with pytest.raises(ValidationError):
        build_spf(10**4, memory_guard=10**3)


def test_primes_up_to():
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_up_to(1).tolist() == []


def test_factor(spf_small):
    assert factor(12, spf_small).factors == ((2, 2), (3, 1))
    assert factor(45, spf_small).factors == ((3, 2), (5, 1))
    assert factor(997, spf_small).factors == ((997, 1),)
    assert factor(1, spf_small).factors == ()
    for n in range(2, 1001):
        assert dict(factor(n, spf_small).factors) == sympy.factorint(n)


def test_factor_out_of_range(spf_small):
    with pytest.raises(FactorizationRangeError):
        factor(1001, spf_small)
    with pytest.raises(FactorizationRangeError):
        factor(0, spf_small)


def test_factor_any_beyond_table(spf_small):
    fact = factor_any(600851475143, spf_small)
    assert fact.factors == ((71, 1), (839, 1), (1471, 1), (6857, 1))
    assert factor_any(360).factors == ((2, 3), (3, 2), (5, 1))
    with pytest.raises(DomainError):
        factor_any(0)


def test_factorization():
    fact = Factorization(360, ((2, 3), (3, 2), (5, 1)))
    assert fact.exponent(2) == 3
    assert fact.exponent(7) == 0
    assert fact.primes == [2, 3, 5]
    assert fact.odd_factors == [(3, 2), (5, 1)]
    product = fact * Factorization(14, ((2, 1), (7, 1)))
    assert product.n == 5040
    assert product.factors == ((2, 4), (3, 2), (5, 1), (7, 1))
    with pytest.raises(ValueError):
        Factorization(12, ((2, 1), (3, 1)))


def test_divisors(spf_small):
    assert divisors(factor(12, spf_small)) == [1, 2, 3, 4, 6, 12]
    assert divisors(factor(1, spf_small)) == [1]
    assert divisors(factor(97, spf_small)) == [1, 97]


def test_squarefree_part():
    assert squarefree_part(18) == 2
    assert squarefree_part(72) == 2
    assert squarefree_part(1) == 1
    assert squarefree_part(30) == 30
    with pytest.raises(DomainError):
        squarefree_part(0)


def test_is_square():
    assert is_square(0)
    assert is_square(1)
    assert is_square(10**18)
    assert not is_square(10**18 + 1)
    assert not is_square(-4)


def test_is_discriminant():
    assert [d for d in range(30) if is_discriminant(d)] == [5, 8, 12, 13, 17, 20, 21, 24, 28, 29]


def test_fundamental_part():
    assert fundamental_part(5) == (5, 1)
    assert fundamental_part(12) == (12, 1)
    assert fundamental_part(20) == (5, 2)
    assert fundamental_part(32) == (8, 2)
    assert fundamental_part(45) == (5, 3)
    assert fundamental_part(96) == (24, 2)
    for bad in (0, 7, 16, -3):
        with pytest.raises(DomainError):
            fundamental_part(bad)


def test_fundamental_part_reconstructs(spf_small):
    for d in range(5, 1000):
        if not is_discriminant(d):
            continue
        d0, f = fundamental_part(d, spf_small)
        assert d0 * f * f == d
        assert is_discriminant(d0)
        assert fundamental_part(d0) == (d0, 1)


def test_divisor_dk():
    assert divisor_dk(2, 6) == 4.0
    assert divisor_dk(0.5, 4) == 0.375
    assert divisor_dk(1, 360) == 1.0
    assert divisor_dk(3, 8) == 10.0
    assert divisor_dk(2, 1) == 1.0
    for k, n in ((0, 6), (-1.5, 6), (2, 0)):
        with pytest.raises(ValidationError):
            divisor_dk(k, n)
    with pytest.raises(ValidationError):
        divisor_dk_vector(0, 10, primes_up_to(10))


def test_divisor_dk_vector():
    primes = primes_up_to(200)
    two = divisor_dk_vector(2, 200, primes)
    assert two[1:].tolist() == [float(sympy.divisor_count(n)) for n in range(1, 201)]
    assert divisor_dk_vector(1, 50, primes).tolist() == [1.0] * 51
    half = divisor_dk_vector(1.5, 200, primes)
    for n in range(1, 201):
        assert half[n] == pytest.approx(divisor_dk(1.5, n), rel=1e-14)
