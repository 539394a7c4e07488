"""Grid evaluation of twisted Dirichlet polynomials over t in [T, 2T].

For every grid point ``t_k = t_start + k * step`` the scan computes

    S_j(t_k) = Re exp(-i theta_j) sum_{p <= X} chi_j(p) p^{-sigma} exp(-i t_k log p)

by incremental phase rotation.  The grid is cut into blocks of
``renorm_interval`` points; each block starts from phases computed from
scratch (argument reduction in extended precision), and inside a block the
phases advance by repeated multiplication with the per-frequency rotor.
Blocks are independent, so any partition of the blocks over workers gives
bit-identical results.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .characters import CharacterTuple
from .errors import BudgetError, DomainError, StateError
from .primes import primes_up_to

GRID_BUDGET = 10**10
_TWO_PI_LD = np.longdouble(8) * np.arctan(np.longdouble(1))


@dataclass(frozen=True)
class ScanConfig:
    char_tuple: CharacterTuple
    sigma: float
    t_start: float
    t_end: float | None = None
    step: float = 0.05
    prime_cutoff: float | None = None
    include_prime_squares: bool = False
    renorm_interval: int = 4096

    def __post_init__(self):
        if self.t_start < 5:
            raise DomainError("t_start must be at least 5")
        if self.t_end is None:
            object.__setattr__(self, "t_end", 2.0 * self.t_start)
        if self.prime_cutoff is None:
            object.__setattr__(self, "prime_cutoff", math.log(self.t_start) ** 2)
        if not self.step > 0:
            raise DomainError("step must be positive")
        if self.t_end < self.t_start:
            raise DomainError("t_end must not precede t_start")
        if self.prime_cutoff < 3:
            raise DomainError("prime cutoff must be at least 3")
        if self.renorm_interval < 1:
            raise DomainError("renorm_interval must be a positive integer")

    @property
    def grid_count(self) -> int:
        # tolerate round-off in (t_end - t_start) / step landing just below an integer
        return int(math.floor((self.t_end - self.t_start) / self.step * (1 + 1e-12))) + 1

    def grid_time(self, k) -> np.ndarray:
        return self.t_start + np.asarray(k) * self.step


@dataclass
class ScanResult:
    config: ScanConfig
    grid_count: int
    thresholds: np.ndarray
    exceedance_counts: np.ndarray
    running_max_min: float
    argmax_t: float
    block_counts: np.ndarray | None = None
    store_every: int | None = None
    values: np.ndarray | None = None
    value_times: np.ndarray | None = None
    probe_indices: np.ndarray | None = None
    probe_values: np.ndarray | None = None
    caveats: tuple = field(default=("grid points are correlated; stderr is a proxy",))

    @property
    def exceedance_counters(self) -> dict:
        return {tuple(float(v) for v in th): int(c) for th, c in zip(self.thresholds, self.exceedance_counts)}

    def summary(self) -> dict:
        return {
            "grid_count": self.grid_count,
            "running_max_min": self.running_max_min,
            "argmax_t": self.argmax_t,
            "exceedance": [
                {"threshold": list(map(float, th)), "count": int(c)}
                for th, c in zip(self.thresholds, self.exceedance_counts)
            ],
        }


@dataclass(frozen=True)
class _Frequencies:
    log_freq: np.ndarray  # longdouble frequencies (log p or 2 log p)
    coeffs: np.ndarray  # complex (r, F)


def frequencies(config: ScanConfig) -> _Frequencies:
    tup, sigma = config.char_tuple, config.sigma
    primes = primes_up_to(config.prime_cutoff)
    rot = np.exp(-1j * np.asarray(tup.thetas))
    logs = np.log(primes.astype(np.longdouble))
    coeffs = [np.stack([c.values[primes % c.modulus] for c in tup.characters]) / primes.astype(float) ** sigma]
    freqs = [logs]
    if config.include_prime_squares:
        sq = primes[primes * primes <= config.prime_cutoff]
        vals = np.stack([c.values[(sq * sq) % c.modulus] for c in tup.characters])
        coeffs.append(vals / (2.0 * sq.astype(float) ** (2 * sigma)))
        freqs.append(2 * logs[: sq.size])
    return _Frequencies(np.concatenate(freqs), rot[:, None] * np.concatenate(coeffs, axis=1))


def _phases(log_freq: np.ndarray, t) -> np.ndarray:
    """exp(-i t f) with the argument reduced mod 2 pi in extended precision."""
    arg = np.fmod(np.longdouble(t) * log_freq, _TWO_PI_LD).astype(np.float64)
    return np.cos(arg) - 1j * np.sin(arg)


def _time_ld(config: ScanConfig, k: int) -> np.longdouble:
    return np.longdouble(config.t_start) + np.longdouble(k) * np.longdouble(config.step)


def evaluate_direct(config: ScanConfig, k: int) -> np.ndarray:
    """S_j at grid index k computed from scratch."""
    fr = frequencies(config)
    z = _phases(fr.log_freq, _time_ld(config, k))
    return (fr.coeffs @ z).real


def rotor_table(log_freq: np.ndarray, step: float, length: int) -> np.ndarray:
    """Row k holds the k-fold product of the one-step rotors."""
    rotor = _phases(log_freq, np.longdouble(step))
    table = np.empty((length, log_freq.size), dtype=np.complex128)
    table[0] = 1.0
    if length > 1:
        table[1:] = rotor
        np.cumprod(table, axis=0, out=table)
    return table


def _scan_blocks(config, fr, table, blocks, thresholds, store_every, probe):
    K = config.renorm_interval
    n = config.grid_count
    counts = []
    best, best_k = -np.inf, -1
    stored, stored_k = [], []
    probed = []
    for b in blocks:
        lo = b * K
        hi = min(lo + K, n)
        z0 = _phases(fr.log_freq, _time_ld(config, lo))
        z = table[: hi - lo] * z0
        s = (z @ fr.coeffs.T).real
        counts.append(np.all(s[:, None, :] > thresholds[None, :, :], axis=2).sum(axis=0))
        mins = s.min(axis=1)
        i = int(np.argmax(mins))
        if mins[i] > best:
            best, best_k = float(mins[i]), lo + i
        if store_every:
            first = (-lo) % store_every
            stored.append(s[first::store_every])
            stored_k.append(np.arange(lo + first, hi, store_every))
        if probe.size:
            hit = probe[(probe >= lo) & (probe < hi)]
            probed.extend(zip(hit.tolist(), s[hit - lo]))
    return counts, best, best_k, stored, stored_k, probed


def scan(
    config: ScanConfig,
    thresholds: Sequence[Sequence[float]] = (),
    store_every: int | None = None,
    threads: int = 1,
    probe: Sequence[int] = (),
) -> ScanResult:
    """Evaluate the whole grid, keeping counters, the running max-min and
    optionally every ``store_every``-th vector and the vectors at ``probe`` indices."""
    n = config.grid_count
    if n > GRID_BUDGET:
        raise BudgetError(f"grid of {n} points exceeds the budget {GRID_BUDGET}")
    r = config.char_tuple.r
    th = np.asarray(thresholds, dtype=float).reshape(-1, r) if len(thresholds) else np.zeros((0, r))
    if not np.all(np.isfinite(th)):
        raise DomainError("thresholds must be finite")
    probe = np.unique(np.asarray(probe, dtype=np.int64))
    if probe.size and (probe[0] < 0 or probe[-1] >= n):
        raise DomainError(f"probe indices must lie in [0, {n})")
    fr = frequencies(config)
    K = config.renorm_interval
    table = rotor_table(fr.log_freq, config.step, min(K, n))
    n_blocks = -(-n // K)
    threads = max(1, min(threads, n_blocks))
    parts = np.array_split(np.arange(n_blocks), threads)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            outs = list(ex.map(lambda bl: _scan_blocks(config, fr, table, bl, th, store_every, probe), parts))
    else:
        outs = [_scan_blocks(config, fr, table, parts[0], th, store_every, probe)]
    block_counts = np.array([c for o in outs for c in o[0]], dtype=np.int64).reshape(n_blocks, len(th))
    counts = block_counts.sum(axis=0)
    best, best_k = -np.inf, -1
    for o in outs:
        if o[1] > best:
            best, best_k = o[1], o[2]
    values = times = None
    if store_every:
        values = np.concatenate([v for o in outs for v in o[3]], axis=0)
        times = config.grid_time(np.concatenate([k for o in outs for k in o[4]]))
    probed = sorted(p for o in outs for p in o[5])
    probe_idx = np.array([k for k, _ in probed], dtype=np.int64)
    probe_val = np.array([v for _, v in probed]).reshape(-1, r)
    return ScanResult(
        config=config,
        grid_count=n,
        thresholds=th,
        exceedance_counts=counts,
        block_counts=block_counts,
        running_max_min=best,
        argmax_t=float(config.grid_time(best_k)),
        store_every=store_every,
        values=values,
        value_times=times,
        probe_indices=probe_idx,
        probe_values=probe_val,
    )


def empirical_psi(result: ScanResult, threshold_vector: Sequence[float]) -> dict:
    """Grid fraction with every coordinate strictly above the threshold vector."""
    tv = np.asarray(threshold_vector, dtype=float)
    match = np.flatnonzero(np.all(result.thresholds == tv[None, :], axis=1)) if len(result.thresholds) else []
    if len(match):
        count, total, source = int(result.exceedance_counts[match[0]]), result.grid_count, "counter"
    elif result.values is not None:
        count = int(np.all(result.values > tv[None, :], axis=1).sum())
        total, source = result.values.shape[0], "stored"
    else:
        raise StateError("no counter for this threshold and no stored values to recount")
    f = count / total
    return {
        "fraction": f,
        "count": count,
        "total": total,
        "stderr_proxy": math.sqrt(f * (1 - f) / total),
        "correlated_grid": True,
        "source": source,
    }


def batch_stderr(result: ScanResult, threshold_vector: Sequence[float], batches: int = 50) -> float:
    """Batch-means standard error of the exceedance fraction.

    Consecutive renormalization blocks are pooled into ``batches`` groups; the
    spread of the group fractions accounts for correlation along the grid.
    """
    tv = np.asarray(threshold_vector, dtype=float)
    match = np.flatnonzero(np.all(result.thresholds == tv[None, :], axis=1))
    if not len(match) or result.block_counts is None:
        raise StateError("no per-block counter for this threshold")
    counts = result.block_counts[:, match[0]]
    K, n = result.config.renorm_interval, result.grid_count
    sizes = np.minimum(K, n - K * np.arange(counts.size))
    groups = np.array_split(np.arange(counts.size), min(batches, counts.size))
    fr = np.array([counts[g].sum() / sizes[g].sum() for g in groups])
    w = np.array([sizes[g].sum() for g in groups], dtype=float)
    if fr.size < 2:
        return float("nan")
    mean = np.average(fr, weights=w)
    var = np.average((fr - mean) ** 2, weights=w) * fr.size / (fr.size - 1)
    return float(math.sqrt(var / fr.size))


def find_simultaneous_max(result: ScanResult) -> dict:
    T = result.config.t_start
    scale = math.log(T) ** (1 - result.config.sigma) / math.log(math.log(T))
    return {
        "t_star": result.argmax_t,
        "value": result.running_max_min,
        "normalized": result.running_max_min / scale,
    }
