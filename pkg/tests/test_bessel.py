import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import j0 as scipy_j0

from biasrace.bessel import bessel_product, j0, log_j0_taylor_constant


def test_j0_against_scipy_on_a_wide_range():
    x = np.concatenate([np.linspace(0, 30, 30001), np.geomspace(30, 1e6, 5000)])
    assert np.max(np.abs(j0(x) - scipy_j0(x))) < 5e-15


def test_j0_even_and_at_zero():
    assert j0(0.0) == 1.0
    assert j0(-3.7) == j0(3.7)


@given(st.floats(min_value=-1e4, max_value=1e4, allow_nan=False))
@settings(max_examples=500, deadline=None)
def test_j0_bounded_and_accurate(x):
    v = j0(x)
    assert abs(v) <= 1.0
    assert abs(v - scipy_j0(x)) < 5e-15


def test_product_matches_direct_product():
    rng = np.random.default_rng(3)
    amps = rng.uniform(0.001, 0.4, 300)
    xi = np.linspace(0, 40, 97)
    factors = scipy_j0(np.outer(xi, amps))
    direct = np.prod(factors, axis=1)
    # absolute error ~1e-15 per factor turns into relative error 1e-15/|J0| near a zero of J0
    rel = np.sum(1e-14 / np.abs(factors), axis=1)
    got = bessel_product(xi, amps)
    assert np.all(np.abs(got - direct) <= rel * np.abs(direct))


def test_product_sign_across_bessel_zero():
    # J0 is negative just past its first zero 2.4048
    assert bessel_product([3.0], [1.0])[0] < 0
    assert bessel_product([3.0], [1.0, 1.0])[0] > 0


def test_taylor_constant_limit():
    assert log_j0_taylor_constant(1e-2) == pytest.approx(-1 / 64, rel=1e-3)
