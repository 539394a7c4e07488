"""Arithmetic factors of a character tuple.

Everything here reduces to averages over the units ``u`` mod ``d`` of powers
of the weighted twisted sum ``W(u) = sum_j a_j exp(-i theta_j) chi_j(u)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .characters import CharacterTuple, enumerate_characters, make_tuple
from .errors import BudgetError, DomainError, SearchFailure, ValidationError

STAR_EPS = 1e-10
SEARCH_BUDGET = 10**6
ALPHA_LADDER = tuple(2.0**k for k in range(1, 41))


@dataclass(frozen=True)
class Weights:
    alphas: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.alphas)
        if not a or not all(math.isfinite(x) and x > 0 for x in a):
            raise ValidationError(f"weights must be positive and finite, got {self.alphas}")
        object.__setattr__(self, "alphas", a)

    @classmethod
    def ones(cls, r: int) -> "Weights":
        return cls((1.0,) * r)

    @classmethod
    def leading(cls, alpha: float, r: int) -> "Weights":
        return cls((float(alpha),) + (1.0,) * (r - 1))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.alphas, dtype=float)


@dataclass(frozen=True)
class FactorReport:
    sigma: float
    alphas: tuple
    xi: float
    xi_js: tuple
    tilde_xi: float | None
    b_factor: float | None
    gap: float | None
    star_excluded_count: int
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "sigma": self.sigma,
            "alphas": list(self.alphas),
            "xi": self.xi,
            "xi_js": list(self.xi_js),
            "tilde_xi": self.tilde_xi,
            "b_factor": self.b_factor,
            "gap": self.gap,
            "star_excluded_count": self.star_excluded_count,
        }


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.5 <= sigma < 1.0:
        raise DomainError(f"sigma must lie in [1/2, 1), got {sigma}")
    return sigma


def _as_weights(tup: CharacterTuple, weights) -> np.ndarray:
    if weights is None:
        return np.ones(tup.r)
    if not isinstance(weights, Weights):
        weights = Weights(tuple(weights))
    a = weights.as_array()
    if a.size != tup.r:
        raise DomainError(f"{a.size} weights for a tuple of size {tup.r}")
    return a


def _image_mean(tup: CharacterTuple, x, power: float) -> float:
    """Mean over units mod d of ``|sum_j x_j exp(-i theta_j) chi_j(u)|^power``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (tup.r,):
        raise DomainError(f"expected {tup.r} coefficients, got shape {x.shape}")
    total = 0.0
    for tv in tup.twisted_chunks():
        total += float(np.sum(np.abs(x @ tv) ** power))
    return total / tup.image().size


def k_quadratic(tup: CharacterTuple, u: int, x: Sequence[float]) -> float:
    """``|sum_j x_j exp(-i theta_j) chi_j(u)|^2``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (tup.r,):
        raise DomainError(f"expected {tup.r} coefficients, got shape {x.shape}")
    w = 0j
    for xj, th, chi in zip(x, tup.thetas, tup.characters):
        w += xj * np.exp(-1j * th) * chi.values[u % chi.modulus]
    return float(w.real**2 + w.imag**2)


def f_value(tup: CharacterTuple, sigma: float, x: Sequence[float]) -> float:
    """Average over units mod d of ``K(u, x)^{1/(2 sigma)}``."""
    return _image_mean(tup, x, 1.0 / sigma)


def xi(tup: CharacterTuple, sigma: float, weights=None) -> float:
    sigma = _check_sigma(sigma)
    return _image_mean(tup, _as_weights(tup, weights), 1.0 / sigma)


def _xi_j_and_excluded(tup: CharacterTuple, sigma: float, a: np.ndarray):
    sums = np.zeros(tup.r)
    excluded = 0
    for tv in tup.twisted_chunks():
        w = a @ tv
        mod = np.abs(w)
        keep = mod > STAR_EPS * a.sum()
        proj = (np.conj(tv[:, keep]) * w[keep]).real
        sums += (mod[keep] ** (1.0 / sigma - 2.0) * proj).sum(axis=1)
        excluded += int(np.count_nonzero(~keep))
    return sums / tup.image().size, excluded


def xi_j_factors(tup: CharacterTuple, sigma: float, weights=None) -> np.ndarray:
    """The r factors Xi_j, summing over units where the weighted sum is nonzero."""
    sigma = _check_sigma(sigma)
    vals, _ = _xi_j_and_excluded(tup, sigma, _as_weights(tup, weights))
    return vals


def tilde_xi(tup: CharacterTuple, sigma: float) -> float:
    if tup.r != 2:
        raise DomainError(f"tilde xi is defined for pairs only, got r={tup.r}")
    sigma = _check_sigma(sigma)
    x = xi(tup, sigma)
    return 2.0 ** (1.0 / (1.0 - sigma)) * x ** (-sigma / (1.0 - sigma))


def matched_pairs(tup: CharacterTuple) -> list[tuple[int, int]]:
    """Pairs ``(j, l)`` (0-based, both >= 1) with chi_j ~ chi_1^2 conj(chi_l)."""
    img = tup.image()
    out = []
    for j in range(1, tup.r):
        for ell in range(1, tup.r):
            # chi_j * conj(chi_1)^2 * chi_l principal mod d
            c = np.zeros(tup.r, dtype=np.int64)
            c[j] += 1
            c[ell] += 1
            c[0] -= 2
            if img.is_trivial_combination(c):
                out.append((j, ell))
    return out


def b_factor(tup: CharacterTuple) -> float:
    if tup.r < 2:
        raise DomainError("B(chi, theta) needs at least two characters")
    th = tup.thetas
    return float(sum(math.cos(2 * th[0] - th[j] - th[ell]) for j, ell in matched_pairs(tup)))


def repulsion_gap(tup: CharacterTuple, sigma: float, weights=None) -> float:
    sigma = _check_sigma(sigma)
    a = _as_weights(tup, weights)
    big_xi, _ = _xi_j_and_excluded(tup, sigma, a)
    if np.any(big_xi < 0):
        raise DomainError("some Xi_j is negative; choose weights with find_alpha first")
    return xi(tup, sigma, a) - float(np.sum(big_xi ** (1.0 / (1.0 - sigma))))


def factor_report(tup: CharacterTuple, sigma: float, weights=None) -> FactorReport:
    sigma = _check_sigma(sigma)
    a = _as_weights(tup, weights)
    big_xi, excluded = _xi_j_and_excluded(tup, sigma, a)
    x = xi(tup, sigma, a)
    gap = None
    if np.all(big_xi >= 0):
        gap = x - float(np.sum(big_xi ** (1.0 / (1.0 - sigma))))
    tx = None
    if tup.r == 2 and sigma > 0.5:
        tx = tilde_xi(tup, sigma)
    b = b_factor(tup) if tup.r >= 2 else None
    return FactorReport(sigma, tuple(a), x, tuple(float(v) for v in big_xi), tx, b, gap, excluded)


def xi_j_expansion(tup: CharacterTuple, sigma: float, alpha: float) -> np.ndarray:
    """Leading-order Xi_j for weights (alpha, 1, ..., 1) as alpha grows."""
    sigma = _check_sigma(sigma)
    r, th = tup.r, tup.thetas
    s = 1.0 / sigma
    out = np.empty(r)
    if r == 1:
        out[0] = alpha ** (s - 1)
        return out
    B = b_factor(tup)
    out[0] = alpha ** (s - 1) * (1 + (r - 1 - (2 * sigma - 1) * B) / (4 * sigma * alpha**2) * (s - 2))
    partner = {j: ell for j, ell in matched_pairs(tup)}
    for j in range(1, r):
        if j in partner:
            c = math.cos(2 * th[0] - th[j] - th[partner[j]])
            out[j] = alpha ** (s - 2) * (1 - (2 * sigma - 1) * c) / (2 * sigma)
        else:
            out[j] = alpha ** (s - 2) / (2 * sigma)
    return out


def gap_leading_coefficient(tup: CharacterTuple, sigma: float) -> float:
    """Limit of ``gap * alpha^{2 - 1/sigma}`` along weights (alpha, 1, ..., 1)."""
    B = b_factor(tup)
    return (tup.r - 1 - (2 * sigma - 1) * B) / (4 * sigma * (1 - sigma))


def find_alpha(tup: CharacterTuple, sigma: float) -> Weights:
    """Smallest ``a`` in 2, 4, ..., 2^40 making every Xi_j and the gap positive."""
    sigma = _check_sigma(sigma)
    tried = []
    for a in ALPHA_LADDER:
        w = Weights.leading(a, tup.r)
        big_xi, _ = _xi_j_and_excluded(tup, sigma, w.as_array())
        ok = bool(np.all(big_xi > 0))
        if ok and tup.r > 1:
            gap = xi(tup, sigma, w) - float(np.sum(big_xi ** (1.0 / (1.0 - sigma))))
            ok = gap > 0
        if ok:
            return w
        tried.append((a, float(big_xi.min())))
    raise SearchFailure(f"no alpha up to 2^40 works; last min Xi_j values: {tried[-3:]}")


@dataclass(frozen=True)
class NegativeXiHit:
    indices: tuple
    labels: tuple
    sigma: float
    min_xi_j: float

    def to_record(self) -> dict:
        return {
            "indices": list(self.indices),
            "labels": ["-".join(map(str, lab)) for lab in self.labels],
            "sigma": self.sigma,
            "min_xi_j": self.min_xi_j,
        }


def search_negative_xi(
    q: int,
    r: int,
    sigma_grid: Sequence[float],
    thetas: Sequence[float] | None = None,
    budget: int = SEARCH_BUDGET,
) -> list[NegativeXiHit]:
    """Scan every r-subset of the characters mod q for a negative Xi_j at unit weights."""
    chars = enumerate_characters(q)
    n = len(chars)
    if not 1 <= r <= n:
        raise DomainError(f"r must be between 1 and phi(q)={n}")
    count = math.comb(n, r)
    if count > budget:
        raise BudgetError(f"C({n}, {r}) = {count} subsets exceeds the budget {budget}")
    thetas = np.zeros(r) if thetas is None else np.asarray(thetas, dtype=float)
    if thetas.shape != (r,):
        raise DomainError(f"expected {r} angles")
    sigmas = [_check_sigma(s) for s in sigma_grid]
    full = make_tuple(chars, require_inequivalent=False)
    table = full.lifted_values()
    rot = np.exp(-1j * thetas)
    hits = []
    for idx in itertools.combinations(range(n), r):
        tv = rot[:, None] * table[list(idx)]
        w = tv.sum(axis=0)
        mod = np.abs(w)
        keep = mod > STAR_EPS * r
        proj = (np.conj(tv[:, keep]) * w[keep]).real
        for s in sigmas:
            vals = (mod[keep] ** (1.0 / s - 2.0) * proj).sum(axis=1) / w.size
            m = float(vals.min())
            if m < -1e-12:
                hits.append(NegativeXiHit(idx, tuple(chars[i].label for i in idx), s, m))
    hits.sort(key=lambda h: (h.min_xi_j, h.indices, h.sigma))
    return hits
