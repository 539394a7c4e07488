"""Random Euler-product model over primes.

Each prime p <= X gets an independent phase ``X(p)`` uniform on the unit
circle; the model analogue of the twisted real parts is
``Re exp(-i theta_j) sum_p chi_j(p) X(p) / p^sigma``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .characters import CharacterTuple, totient
from .errors import DomainError
from .factors import f_value
from .primes import kahan_sum, primes_up_to
from .special import bessel_i0, g_sigma, log_bessel_i0

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STREAM = np.uint64(0xD1B54A32D192ED03)
_CHUNK = 8192


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; a bijection on uint64 with full avalanche."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed: int, sample_idx: np.ndarray, prime_idx: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) doubles keyed by (seed, sample, prime); broadcasts its index arrays."""
    with np.errstate(over="ignore"):
        key = _mix64(np.uint64(seed) + _GOLDEN)
        s = _mix64(key ^ (np.asarray(sample_idx, dtype=np.uint64) * _GOLDEN))
        h = _mix64(s ^ ((np.asarray(prime_idx, dtype=np.uint64) + np.uint64(1)) * _STREAM))
    return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class RandomModelConfig:
    char_tuple: CharacterTuple
    sigma: float
    prime_cutoff: int
    samples: int
    seed: int = 0

    def __post_init__(self):
        if self.prime_cutoff < 2:
            raise DomainError("prime cutoff must be at least 2 (no primes below it)")
        if self.samples < 1:
            raise DomainError("need at least one sample")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class EmpiricalDistribution:
    """N draws of the r twisted real parts (``samples``) and the complex sums."""

    dim: int
    samples: np.ndarray
    seed: int
    complex_values: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.samples.shape[0]


def twisted_coefficients(tup: CharacterTuple, sigma: float, primes: np.ndarray) -> np.ndarray:
    """``exp(-i theta_j) chi_j(p) / p^sigma`` as an (r, n_primes) array."""
    rot = np.exp(-1j * np.asarray(tup.thetas))
    chi = np.stack([c.values[primes % c.modulus] for c in tup.characters])
    return rot[:, None] * chi / primes.astype(float) ** sigma


def _sample_block(seed, coeffs, lo, hi):
    idx = np.arange(lo, hi, dtype=np.uint64)
    pidx = np.arange(coeffs.shape[1], dtype=np.uint64)
    phases = 2 * np.pi * counter_uniforms(seed, idx[:, None], pidx[None, :])
    z = np.exp(1j * phases)  # (n, P)
    terms = z[:, :, None] * coeffs.T[None, :, :]  # (n, P, r)
    return kahan_sum(terms, axis=1)


def sample_model(config: RandomModelConfig, threads: int = 1) -> EmpiricalDistribution:
    primes = primes_up_to(config.prime_cutoff)
    if primes.size == 0:
        raise DomainError(f"no primes up to {config.prime_cutoff}")
    coeffs = twisted_coefficients(config.char_tuple, config.sigma, primes)
    bounds = [(lo, min(lo + _CHUNK, config.samples)) for lo in range(0, config.samples, _CHUNK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as ex:
            blocks = list(ex.map(lambda b: _sample_block(config.seed, coeffs, *b), bounds))
    else:
        blocks = [_sample_block(config.seed, coeffs, lo, hi) for lo, hi in bounds]
    values = np.concatenate(blocks, axis=0)
    return EmpiricalDistribution(config.char_tuple.r, values.real.copy(), config.seed, values)


def mgf_product(tup: CharacterTuple, sigma: float, x: Sequence[float], prime_cutoff: float) -> float:
    """log prod_{p <= X} I0(sqrt(K(p, x)) / p^sigma)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (tup.r,) or not np.all(np.isfinite(x)):
        raise DomainError(f"expected {tup.r} finite coefficients")
    primes = primes_up_to(prime_cutoff)
    coeffs = twisted_coefficients(tup, sigma, primes)
    arg = np.abs(x @ coeffs)
    return math.fsum(log_bessel_i0(arg))


def mc_mgf(dist: EmpiricalDistribution, x: Sequence[float]) -> tuple[float, float]:
    """Sample mean of exp(sum_j x_j S_j) and its standard error."""
    vals = np.exp(dist.samples @ np.asarray(x, dtype=float))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def single_prime_mgf(z: float, coeff: complex) -> float:
    """Exact E exp(z Re(coeff X(p))) = I0(z |coeff|)."""
    return bessel_i0(abs(z * coeff))


def product_main_term_compare(tup: CharacterTuple, sigma: float, x: Sequence[float], prime_cutoff: float) -> dict:
    """Bessel-product log against its main term (G / log ||x||) F(x)."""
    x = np.asarray(x, dtype=float)
    if prime_cutoff < 30:
        raise DomainError("comparison requires X >= 30")
    top = prime_cutoff ** (2 * sigma / 3)
    if np.any(x < 3) or np.any(x > top):
        raise DomainError(f"coefficients must satisfy 3 <= x_j <= X^(2 sigma/3) = {top:.6g}")
    lhs = mgf_product(tup, sigma, x, prime_cutoff)
    norm = float(np.max(np.abs(x)))
    rhs = g_sigma(sigma).g_value / math.log(norm) * f_value(tup, sigma, x)
    return {"lhs": lhs, "rhs": rhs, "rel_error": abs(lhs - rhs) / abs(rhs)}


def b_sum_compare(sigma: float, u: int, d: int, x: float, prime_cutoff: float) -> dict:
    """Bessel sum over p <= X, p = u mod d, against G x^{1/sigma} / (phi(d) log(x+2))."""
    if math.gcd(u, d) != 1:
        raise DomainError(f"gcd({u}, {d}) must be 1")
    if not 0 <= x <= prime_cutoff ** (2 * sigma / 3):
        raise DomainError("x must satisfy 0 <= x <= X^(2 sigma/3)")
    primes = primes_up_to(prime_cutoff)
    primes = primes[primes % d == u % d]
    lhs = math.fsum(log_bessel_i0(x / primes.astype(float) ** sigma))
    rhs = g_sigma(sigma).g_value * x ** (1 / sigma) / (totient(d) * math.log(x + 2))
    rel = 0.0 if lhs == rhs == 0 else abs(lhs - rhs) / abs(rhs)
    return {"lhs": lhs, "rhs": rhs, "rel_error": rel}


def mc_joint_tail(dist: EmpiricalDistribution, thresholds: Sequence[float]) -> dict:
    """Fraction of draws with every coordinate strictly above its threshold."""
    th = np.asarray(thresholds, dtype=float)
    hit = np.all(dist.samples > th[None, :], axis=1)
    p = float(hit.mean())
    return {"p_hat": p, "stderr": math.sqrt(p * (1 - p) / dist.n), "count": int(hit.sum())}


def abs_moment(dist: EmpiricalDistribution, j: int, k: int) -> tuple[float, float]:
    """Empirical E|P_j|^{2k} of the complex model sum with its standard error."""
    vals = np.abs(dist.complex_values[:, j]) ** (2 * k)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def variance_sum(tup: CharacterTuple, sigma: float, j: int, prime_cutoff: float) -> float:
    """sum_{p <= X} |chi_j(p)|^2 / p^{2 sigma}."""
    primes = primes_up_to(prime_cutoff)
    chi = tup.characters[j]
    return math.fsum(np.abs(chi.values[primes % chi.modulus]) ** 2 / primes.astype(float) ** (2 * sigma))
