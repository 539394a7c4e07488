"""Prime sieving and compensated summation."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import BudgetError

SIEVE_LIMIT = 10**8
_SEGMENT = 1 << 22


def _small_primes(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def primes_up_to(x: float) -> np.ndarray:
    """All primes p <= x, ascending, by a segmented sieve (read-only, cached)."""
    n = int(math.floor(x))
    if n > SIEVE_LIMIT:
        raise BudgetError(f"sieve limit {SIEVE_LIMIT} exceeded (requested {n})")
    return _sieve(n)


@lru_cache(maxsize=8)
def _sieve(n: int) -> np.ndarray:
    out = _segmented(n)
    out.setflags(write=False)
    return out


def _segmented(n: int) -> np.ndarray:
    root = math.isqrt(n)
    base = _small_primes(root)
    if n <= _SEGMENT:
        return _small_primes(n)
    chunks = [base]
    lo = root + 1
    while lo <= n:
        hi = min(lo + _SEGMENT, n + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start >= hi:
                continue
            seg[start - lo :: p] = False
        chunks.append(np.flatnonzero(seg).astype(np.int64) + lo)
        lo = hi
    return np.concatenate(chunks)


def kahan_sum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Compensated sum along ``axis`` in index order (vectorised over the other axes)."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    total = np.zeros(v.shape[1:], dtype=v.dtype)
    comp = np.zeros_like(total)
    for row in v:
        y = row - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total
