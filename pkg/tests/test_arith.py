import math

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from biasrace.arith import (
    IntervalRangeError,
    Modulus,
    as_modulus,
    classify_residue,
    construct_moduli_sequence,
    divisors,
    euler_phi,
    factorize,
    half_primorial,
    is_prime,
    lambda_density_exponent,
    next_prime,
    ratio_rho_logradical,
    rho,
    rho_bruteforce,
    von_mangoldt,
)
from biasrace.characters import enumerate_real_characters
from biasrace.reference import REFERENCE_TABLE


def test_factorize_examples():
    assert factorize(1) == []
    assert factorize(12) == [(2, 2), (3, 1)]
    assert factorize(4849845) == [(3, 1), (5, 1), (7, 1), (11, 1), (13, 1), (17, 1), (19, 1)]


@given(st.integers(min_value=1, max_value=10**12))
@settings(max_examples=200, deadline=None)
def test_factorize_matches_sympy(n):
    assert factorize(n) == sorted(sympy.factorint(n).items())


@given(st.integers(min_value=0, max_value=10**15))
@settings(max_examples=300, deadline=None)
def test_is_prime_matches_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


def test_next_prime():
    assert next_prime(1) == 2
    assert next_prime(13) == 17
    assert next_prime(54) == 59


def test_rho_examples():
    assert rho(3) == 2
    assert rho(8) == 4
    assert rho(105) == 8
    assert rho(4) == 2
    assert rho(12) == 4  # 4 || 12


def test_rho_formula_equals_index_of_squares():
    for q in range(3, 10001):
        assert rho(q) == rho_bruteforce(q), q


def test_reduced_modulus_keeps_rho_and_conductors():
    for q in range(3, 10001):
        m = as_modulus(q)
        r = as_modulus(m.reduced)
        assert r.rho == m.rho, q
    for q in range(3, 600):
        m = as_modulus(q)
        c1 = sorted(c.conductor for c in enumerate_real_characters(q))
        c2 = sorted(c.conductor for c in enumerate_real_characters(m.reduced))
        assert c1 == c2, q


def test_modulus_fields():
    m = Modulus.of(360)
    assert m.omega == 3
    assert m.radical == 30
    assert 360 % m.radical == 0
    assert m.euler_phi == 96
    assert m.reduced == 8 * 15
    with pytest.raises(ValueError):
        Modulus.of(2)


def test_classify_residue_examples():
    assert classify_residue(1, 5) == 1
    assert classify_residue(3, 4) == 0
    assert classify_residue(2, 7) == 1
    with pytest.raises(ValueError):
        classify_residue(3, 9)


def test_classify_residue_matches_real_characters():
    for q in range(3, 501):
        chis = enumerate_real_characters(q)
        for a in range(1, q):
            if math.gcd(a, q) != 1:
                continue
            assert classify_residue(a, q) == int(all(c(a) == 1 for c in chis)), (a, q)


def test_classify_residue_large_modulus_branch():
    q = 3 * 5 * 7 * 11 * 13 * 17 * 19 * 23  # above the brute-force range
    for a in [1, 4, 2, 3, 169, 2 * 2 * 7 * 7, 101]:
        if math.gcd(a, q) == 1:
            expect = int(all(pow(a % p, (p - 1) // 2, p) == 1 for p in (3, 5, 7, 11, 13, 17, 19, 23)))
            assert classify_residue(a, q) == expect


def test_ratio_column():
    assert abs(ratio_rho_logradical(3) - 1.82) <= 0.005
    assert abs(ratio_rho_logradical(15015) - 3.33) <= 0.005
    assert ratio_rho_logradical(4) == pytest.approx(2 / math.log(2))


def test_ratio_column_two_decimals():
    # every published entry is the exact value rounded or truncated to two decimals
    for q, (_, published, _) in REFERENCE_TABLE.items():
        x = ratio_rho_logradical(q)
        assert published in (round(x, 2), math.floor(x * 100) / 100)


def test_half_primorial():
    assert half_primorial(1).q == 3
    assert half_primorial(5).q == 15015
    assert half_primorial(7).q == 4849845
    for k in range(1, 12):
        m = half_primorial(k)
        assert m.omega == k
        assert m.q % 2 == 1
        assert all(e == 1 for _, e in m.factors)
    with pytest.raises(ValueError):
        half_primorial(0)
    with pytest.raises(OverflowError):
        half_primorial(65)


def test_lambda_constant():
    lam = lambda_density_exponent()
    assert lam > 0
    assert abs(lam - 0.086071) < 1e-6
    mpmath.mp.dps = 40
    ref = 1 - (1 + mpmath.log(mpmath.log(2))) / mpmath.log(2)
    assert abs(lam - float(ref)) < 1e-15


def test_moduli_sequence_construction():
    seq = construct_moduli_sequence(4.0, 2)
    assert seq.c1 < 2 / math.log(4)
    assert seq.c1 == pytest.approx(4.0 / 2**seq.e_c)
    # each chosen prime lies in its interval
    for l, p in enumerate(seq.primes_I, 1):
        centre = math.exp(2**l / seq.c1)
        assert centre < p < 2 * centre and is_prime(p)
    for l, p in enumerate(seq.primes_J, 1):
        centre = math.exp(2**l / seq.c1)
        assert 2 * centre < p < 4 * centre and is_prime(p)
    qs = [m.q for m in seq.moduli]
    assert qs == sorted(qs)
    for m, r in zip(seq.moduli, seq.ratios):
        assert r == pytest.approx(2 ** (m.omega + 1) / math.log(m.q))


def test_moduli_sequence_interval_example():
    # c1 = 1/2 gives I_1 = (e^4, 2 e^4) = (54.6, 109.2)
    seq = construct_moduli_sequence(1.0, 1)
    assert seq.c1 == pytest.approx(0.5)
    assert 54.6 < seq.primes_I[0] < 109.2


def test_moduli_sequence_cap():
    with pytest.raises(IntervalRangeError, match="interval exceeds integer range"):
        construct_moduli_sequence(1.0, 12)
    with pytest.raises(ValueError):
        construct_moduli_sequence(-1.0, 2)


def test_von_mangoldt_and_phi():
    assert von_mangoldt(1) == 0
    assert von_mangoldt(8) == pytest.approx(math.log(2))
    assert von_mangoldt(12) == 0
    for n in range(1, 300):
        assert euler_phi(n) == sympy.totient(n)
        assert divisors(n) == sympy.divisors(n)


@given(st.integers(3, 10**6), st.integers(3, 10**6))
@settings(max_examples=200, deadline=None)
def test_rho_multiplicative_on_coprime_odd(a, b):
    a, b = a | 1, b | 1
    if math.gcd(a, b) != 1:
        return
    assert rho(a * b) == rho(a) * rho(b)


@given(st.integers(3, 2000))
@settings(max_examples=200, deadline=None)
def test_square_count_identity(q):
    m = as_modulus(q)
    units = [a for a in range(1, q) if math.gcd(a, q) == 1]
    squares = sum(classify_residue(a, q) for a in units)
    assert squares * m.rho == m.euler_phi
    assert np.isclose(ratio_rho_logradical(q) * math.log(m.radical), m.rho)
