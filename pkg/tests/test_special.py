import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ljoint.errors import DomainError
from ljoint.special import SWITCH, a_from_g, bessel_i0, g_sigma, log_bessel_i0

# frozen from an independent mpmath run at 100 digits: dyadic Gauss-Legendre
# panels [2^k, 2^(k+1)] for k = -100..200 plus the analytic u^2/4 head
G_FROZEN = {0.6: 1.5760045646565173, 0.75: 2.4717245537395368}


def test_i0_partial_series_value():
    # sum_{n<=20} 1/(n!)^2 by hand
    expect = math.fsum(1 / math.factorial(n) ** 2 for n in range(21))
    assert bessel_i0(2.0) == pytest.approx(expect, rel=1e-15)
    assert expect == pytest.approx(2.2795853023360673, rel=1e-15)


@pytest.mark.parametrize("u", [0.0, 1e-8, 0.3, 1.0, 7.5, 14.99, 15.0, 15.01, 40.0, 300.0, 700.0])
def test_i0_against_mpmath(u):
    mp.mp.dps = 40
    ref = mp.besseli(0, u)
    if u < 700:
        assert bessel_i0(u) == pytest.approx(float(ref), rel=1e-13)
    assert log_bessel_i0(u) == pytest.approx(float(mp.log(ref)), rel=1e-13, abs=1e-300)


def test_log_i0_large_argument_no_overflow():
    v = log_bessel_i0(1e6)
    mp.mp.dps = 40
    assert v == pytest.approx(float(mp.log(mp.besseli(0, 1e6))), rel=1e-14)
    assert math.isinf(bessel_i0(1e6))


def test_branch_switch_continuity():
    below = np.nextafter(SWITCH, 0)
    assert abs(log_bessel_i0(below) - log_bessel_i0(SWITCH + 1e-12)) < 1e-11


@given(st.floats(0, 50))
def test_monotone_and_bounded(u):
    lo = log_bessel_i0(u)
    assert 0 <= lo <= u
    assert lo <= u * u / 4 + 1e-15
    assert log_bessel_i0(u + 0.1) >= lo


def test_vectorized():
    u = np.linspace(0, 40, 101)
    assert np.array_equal(log_bessel_i0(u), np.array([log_bessel_i0(float(x)) for x in u]))


def test_domain_errors():
    for bad in (-1.0, float("nan"), float("inf")):
        with pytest.raises(DomainError):
            bessel_i0(bad)
    for s in (0.5, 0.504, 0.996, 1.0):
        with pytest.raises(DomainError):
            g_sigma(s)


@pytest.mark.parametrize("sigma", sorted(G_FROZEN))
def test_g_against_frozen_oracle(sigma):
    c = g_sigma(sigma)
    assert abs(c.g_value - G_FROZEN[sigma]) < 1e-11
    assert c.quadrature_error_estimate < 1e-9


def test_a_closed_form():
    for s in (0.55, 0.7, 0.9):
        c = g_sigma(s)
        mp.mp.dps = 30
        expect = (mp.mpf(s) ** (2 * s) / ((1 - mp.mpf(s)) ** (2 * s - 1) * mp.mpf(c.g_value) ** s)) ** (1 / (1 - mp.mpf(s)))
        assert c.a_value == pytest.approx(float(expect), rel=1e-13)
        assert a_from_g(s, c.g_value) == c.a_value


def test_g_endpoint_poles():
    # small u gives u^2/4, a pole 1/(4(2 - 1/sigma)) at sigma = 1/2;
    # large u gives u, a pole 1/(1/sigma - 1) at sigma = 1
    lo = g_sigma(0.505)
    assert lo.g_value * 4 * (2 - 1 / 0.505) == pytest.approx(1.0, rel=0.05)
    hi = g_sigma(0.995)
    assert hi.g_value * (1 / 0.995 - 1) == pytest.approx(1.0, rel=0.05)
    vals = [g_sigma(s).g_value for s in np.linspace(0.51, 0.99, 13)]
    k = int(np.argmin(vals))
    assert all(b < a for a, b in zip(vals[:k], vals[1 : k + 1]))
    assert all(b > a for a, b in zip(vals[k:], vals[k + 1 :]))
