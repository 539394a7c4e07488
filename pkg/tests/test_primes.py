import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ljoint.errors import BudgetError
from ljoint.primes import kahan_sum, primes_up_to


def _naive(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]


@given(st.integers(0, 3000))
def test_small_sieve(n):
    assert primes_up_to(n).tolist() == _naive(n)


def test_segmented_sieve():
    ps = primes_up_to(10_000_000)
    assert ps.size == 664579
    assert ps[-1] == 9999991
    assert primes_up_to(5_000_000.7).size == 348513


def test_budget():
    with pytest.raises(BudgetError):
        primes_up_to(10**9)


def test_kahan_sum():
    v = np.array([1.0] + [1e-16] * 10000)
    assert np.cumsum(v)[-1] == 1.0  # naive summation drops every small term
    assert kahan_sum(v) == pytest.approx(1 + 1e-12, rel=1e-15)
    m = np.random.default_rng(0).normal(size=(50, 7))
    assert np.allclose(kahan_sum(m, axis=0), m.sum(axis=0))
