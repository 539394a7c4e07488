"""Modified Bessel function I0 and the constants G(sigma), A(sigma)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

SWITCH = 15.0
SIGMA_MIN, SIGMA_MAX = 0.505, 0.995

_N_SERIES = 60
_N_ASYMP = 30
# a_k = ((2k-1)!!)^2 / (k! 8^k): I0(u) ~ e^u / sqrt(2 pi u) * sum_k a_k u^{-k}
_ASYMP = np.empty(_N_ASYMP)
_ASYMP[0] = 1.0
for _k in range(1, _N_ASYMP):
    _ASYMP[_k] = _ASYMP[_k - 1] * (2 * _k - 1) ** 2 / (8.0 * _k)


def _check_arg(u) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("Bessel argument must be finite and non-negative")
    return arr


def _series_tail(u: np.ndarray) -> np.ndarray:
    """I0(u) - 1 from the power series, without cancellation at small u."""
    x = (u / 2.0) ** 2
    term = x.copy()
    total = x.copy()
    for n in range(2, _N_SERIES):
        term = term * x / (n * n)
        total = total + term
    return total


def _asymptotic_factor(u: np.ndarray) -> np.ndarray:
    """``sum_k a_k u^{-k}``; for u > 15 the terms shrink through k = 29."""
    inv = 1.0 / u
    total = np.zeros_like(u)
    for a in _ASYMP[::-1]:
        total = total * inv + a
    return total


def bessel_i0(u):
    """I0(u) for u >= 0; accepts scalars or arrays."""
    arr = _check_arg(u)
    out = np.empty_like(arr)
    small = arr <= SWITCH
    out[small] = 1.0 + _series_tail(arr[small])
    big = arr[~small]
    with np.errstate(over="ignore"):
        out[~small] = np.exp(big) / np.sqrt(2 * np.pi * big) * _asymptotic_factor(big)
    return float(out) if out.ndim == 0 else out


def log_bessel_i0(u):
    """log I0(u), overflow-free for large arguments."""
    arr = _check_arg(u)
    out = np.empty_like(arr)
    small = arr <= SWITCH
    out[small] = np.log1p(_series_tail(arr[small]))
    big = arr[~small]
    out[~small] = big - 0.5 * np.log(2 * np.pi * big) + np.log(_asymptotic_factor(big))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _log_asymptotic_coeffs(n: int = 8) -> tuple[float, ...]:
    """Coefficients b_k of ``log(sum_k a_k x^k) = sum_{k>=1} b_k x^k``."""
    a = _ASYMP[: n + 1]
    b = [0.0] * (n + 1)
    for k in range(1, n + 1):
        # k a_k = sum_{j=1}^{k} j b_j a_{k-j}
        s = k * a[k] - sum(j * b[j] * a[k - j] for j in range(1, k))
        b[k] = s / k
    return tuple(b[1:])


@dataclass(frozen=True)
class SigmaConstants:
    sigma: float
    g_value: float
    a_value: float
    quadrature_error_estimate: float


def a_from_g(sigma: float, g: float) -> float:
    return (sigma ** (2 * sigma) / ((1 - sigma) ** (2 * sigma - 1) * g**sigma)) ** (1 / (1 - sigma))


def _g_integral(sigma: float, epsabs: float) -> tuple[float, float]:
    s = 1.0 / sigma
    u0, U = 1e-3, 1e4
    # [0, u0]: log I0(u) = u^2/4 - u^4/64 + u^6/576 - ...
    head = 0.0
    for c, p in ((1 / 4, 2), (-1 / 64, 4), (1 / 576, 6), (-11 / 49152, 8)):
        head += c * u0 ** (p - s) / (p - s)
    head_err = 11 / 49152 * u0 ** (8 - s)

    # (u0, U): smooth integrand, composite Gauss-Legendre on geometric panels;
    # the 24-node rule against the 32-node rule estimates the error
    panels = 28
    while True:
        edges = np.geomspace(u0, U, panels + 1)
        a, b = edges[:-1, None], edges[1:, None]
        est = []
        for n in (24, 32):
            x, w = np.polynomial.legendre.leggauss(n)
            u = (b - a) / 2 * x + (b + a) / 2
            est.append(float(np.sum((b - a) / 2 * w * log_bessel_i0(u) * u ** (-1.0 - s))))
        mid, mid_err = est[1], abs(est[1] - est[0])
        if mid_err <= epsabs or panels >= 28 * 2**6:
            break
        panels *= 2
    # [U, inf): u - log(2 pi u)/2 + sum_k b_k u^{-k}, integrated term by term
    logU = math.log(U)
    tail = U ** (1 - s) / (s - 1)
    tail -= 0.5 * math.log(2 * math.pi) * U ** (-s) / s
    tail -= 0.5 * U ** (-s) * (s * logU + 1) / s**2
    bs = _log_asymptotic_coeffs()
    for k, bk in enumerate(bs, start=1):
        tail += bk * U ** (-s - k) / (s + k)
    tail_err = abs(bs[-1]) * U ** (-s - len(bs)) * 10
    return head + mid + tail, head_err + mid_err + tail_err


@lru_cache(maxsize=256)
def _g_sigma_cached(sigma: float, epsabs: float) -> SigmaConstants:
    g, err = _g_integral(sigma, epsabs)
    g = float(g)
    return SigmaConstants(sigma, g, a_from_g(sigma, g), float(err))


def g_sigma(sigma: float, epsabs: float = 1e-10) -> SigmaConstants:
    """G(sigma) = int_0^inf log I0(u) u^{-1-1/sigma} du together with A(sigma)."""
    sigma = float(sigma)
    if not (SIGMA_MIN <= sigma <= SIGMA_MAX):
        raise DomainError(f"sigma={sigma} outside the supported band [{SIGMA_MIN}, {SIGMA_MAX}]")
    return _g_sigma_cached(sigma, float(epsabs))
