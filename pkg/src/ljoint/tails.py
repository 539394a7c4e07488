"""Saddle-point solutions and closed-form log-tail predictions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .characters import CharacterTuple
from .errors import DomainError
from .factors import Weights, xi, xi_j_factors
from .special import g_sigma

V_MIN = 3.0
LOG_Y_MAX = 200.0


@dataclass(frozen=True)
class TailPrediction:
    sigma: float
    v: float
    y: float
    x: tuple
    thresholds: tuple
    log_psi_leading: float
    log_psi_saddle: float
    xi: float = float("nan")
    warnings: tuple = field(default_factory=tuple)

    def to_record(self) -> dict:
        return {
            "sigma": self.sigma,
            "v": self.v,
            "y": self.y,
            "x": list(self.x),
            "thresholds": list(self.thresholds),
            "xi": self.xi,
            "log_psi_leading": self.log_psi_leading,
            "log_psi_saddle": self.log_psi_saddle,
            "warnings": list(self.warnings),
        }


def saddle_map(sigma: float, y: float) -> float:
    """V as a function of the saddle ratio y: G / (sigma log y) * y^{1/sigma - 1}."""
    g = g_sigma(sigma).g_value
    return g / (sigma * math.log(y)) * y ** (1.0 / sigma - 1.0)


def _log_saddle_map(sigma: float, g: float, log_y: float) -> float:
    return math.log(g / sigma) - math.log(log_y) + (1.0 / sigma - 1.0) * log_y


def solve_y(sigma: float, v: float) -> float:
    """Solve V = G/(sigma log y) y^{1/sigma-1} on the increasing branch."""
    if not v >= V_MIN:
        raise DomainError(f"V must be at least {V_MIN}, got {v}")
    g = g_sigma(sigma).g_value
    lo = math.log(math.exp(sigma / (1.0 - sigma)) + 1.0)
    hi = LOG_Y_MAX
    target = math.log(v)
    if _log_saddle_map(sigma, g, lo) > target:
        raise DomainError("V too small for asymptotic regime")
    if _log_saddle_map(sigma, g, hi) < target:
        raise DomainError(f"V={v} beyond the solver range log y <= {LOG_Y_MAX} at sigma={sigma}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _log_saddle_map(sigma, g, mid) < target:
            lo = mid
        else:
            hi = mid
    log_y = 0.5 * (lo + hi)
    y = math.exp(log_y)
    resid = abs(math.exp(_log_saddle_map(sigma, g, log_y)) - v) / v
    if resid > 1e-10:
        raise DomainError(f"saddle solver residual {resid:.3g} above 1e-10")
    return y


def solve_saddle(sigma: float, weights, v: float) -> TailPrediction:
    """Saddle points x_j = alpha_j * y for the common large-value scale V."""
    a = weights.as_array() if isinstance(weights, Weights) else np.asarray(weights, dtype=float)
    y = solve_y(sigma, v)
    nan = float("nan")
    return TailPrediction(sigma, v, y, tuple(a * y), (), nan, nan)


def asymptotic_saddle(sigma: float, v: float) -> float:
    """Main term (A/(1-sigma)) (V log V)^{sigma/(1-sigma)} of the saddle ratio."""
    if not v >= V_MIN:
        raise DomainError(f"V must be at least {V_MIN}, got {v}")
    a = g_sigma(sigma).a_value
    return a / (1.0 - sigma) * (v * math.log(v)) ** (sigma / (1.0 - sigma))


def predict_single(sigma: float, v: float) -> float:
    """log of the single-L tail: -A V^{1/(1-sigma)} (log V)^{sigma/(1-sigma)}."""
    if not v >= V_MIN:
        raise DomainError(f"V must be at least {V_MIN}, got {v}")
    a = g_sigma(sigma).a_value
    return -a * v ** (1.0 / (1.0 - sigma)) * math.log(v) ** (sigma / (1.0 - sigma))


def predict_log_psi(tup: CharacterTuple, sigma: float, weights, v: float, t: float | None = None) -> TailPrediction:
    w = weights if isinstance(weights, Weights) else Weights(tuple(weights))
    big_xi = xi_j_factors(tup, sigma, w)
    if np.any(big_xi <= 0):
        raise DomainError("all Xi_j must be positive; choose weights with find_alpha")
    x = xi(tup, sigma, w)
    y = solve_y(sigma, v)
    warnings = []
    if t is not None:
        if t <= math.e:
            raise DomainError("T must exceed e for the range check")
        ceiling = math.log(t) ** (1.0 - sigma) / math.log(math.log(t))
        if v > ceiling:
            warnings.append(f"V={v:g} exceeds (log T)^(1-sigma)/loglog T = {ceiling:g}")
    return TailPrediction(
        sigma=sigma,
        v=v,
        y=y,
        x=tuple(w.as_array() * y),
        thresholds=tuple(big_xi * v),
        log_psi_leading=x * predict_single(sigma, v),
        log_psi_saddle=-(1.0 - sigma) * x * y * v,
        xi=x,
        warnings=tuple(warnings),
    )
