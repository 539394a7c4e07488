"""Quick invariant checks behind ``ljoint verify --suite``.

Each check returns a dict with the suite, a name, ``ok`` and a short detail.
They are cheap (a few seconds for ``all``) and deterministic.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .characters import enumerate_characters, equivalent, make_tuple, primitive_inducing, totient
from .factors import b_factor, tilde_xi, xi, xi_j_factors
from .model import RandomModelConfig, mc_mgf, sample_model, single_prime_mgf
from .scan import ScanConfig, evaluate_direct, scan
from .special import bessel_i0, g_sigma, log_bessel_i0
from .tails import saddle_map, solve_y


def _check(suite, name, ok, detail=""):
    return {"suite": suite, "name": name, "ok": bool(ok), "detail": detail}


def _characters():
    out = []
    for q in (8, 12, 13, 15, 16, 21):
        chars = enumerate_characters(q)
        table = np.stack([c.values for c in chars])
        gram = table @ table.conj().T
        err = float(np.max(np.abs(gram - totient(q) * np.eye(len(chars)))))
        out.append(_check("characters", f"orthogonality mod {q}", err < 1e-9, f"max error {err:.2e}"))
        ok = all(primitive_inducing(c).is_primitive and equivalent(c, primitive_inducing(c)) for c in chars)
        out.append(_check("characters", f"inducing characters mod {q}", ok))
    return out


def _special():
    out = []
    v = bessel_i0(2.0)
    out.append(_check("special", "I0(2)", abs(v - 2.2795853023360673) < 1e-14, repr(v)))
    lo, hi = log_bessel_i0(np.nextafter(15.0, 0)), log_bessel_i0(15.0)
    out.append(_check("special", "log I0 continuity at the branch switch", abs(hi - lo) < 1e-12))
    g = g_sigma(0.6).g_value
    out.append(_check("special", "G(0.6) reference", abs(g - 1.5760045646565173) < 1e-9, repr(g)))
    return out


def _factors():
    out = []
    rng = np.random.default_rng(1)
    chars = enumerate_characters(7) + enumerate_characters(9)
    worst = 0.0
    for i, j in itertools.combinations(range(len(chars)), 2):
        if equivalent(chars[i], chars[j]):
            continue
        tup = make_tuple([chars[i], chars[j]], rng.uniform(0, 2 * math.pi, 2))
        worst = max(worst, abs(xi(tup, 0.5) - 2.0))
    out.append(_check("factors", "two characters at sigma=1/2 give 2", worst < 1e-10, f"{worst:.2e}"))
    for q in (5, 7, 11):
        tup = make_tuple(enumerate_characters(q))
        err = abs(xi(tup, 0.75) - (q - 1) ** (1 / 0.75 - 1))
        out.append(_check("factors", f"full tuple mod {q}", err < 1e-10, f"{err:.2e}"))
    tup = make_tuple([chars[1], chars[3], chars[8]], (0.3, 1.1, 2.0))
    a = np.array([3.0, 1.5, 0.7])
    lhs = xi(tup, 0.7, a)
    rhs = float(a @ xi_j_factors(tup, 0.7, a))
    out.append(_check("factors", "xi equals the weighted sum of Xi_j", abs(lhs - rhs) <= 1e-10 * (1 + lhs)))
    pair = make_tuple([chars[1], chars[2]])
    out.append(_check("factors", "pair repulsion", tilde_xi(pair, 0.75) > 2))
    out.append(_check("factors", "B factor in [0, 1]", 0 <= b_factor(tup) <= 1))
    return out


def _tails():
    out = []
    worst = 0.0
    for s in (0.55, 0.7, 0.9):
        for v in (10.0, 100.0, 1000.0):
            y = solve_y(s, v)
            worst = max(worst, abs(saddle_map(s, y) - v) / v)
    out.append(_check("tails", "saddle round trip", worst <= 1e-10, f"{worst:.2e}"))
    return out


def _model():
    chi = enumerate_characters(5)[1]
    tup = make_tuple([chi])
    dist = sample_model(RandomModelConfig(tup, 0.75, 2, 20000, seed=7))
    mean, se = mc_mgf(dist, [1.0])
    exact = single_prime_mgf(1.0, chi(2) / 2**0.75)
    return [_check("model", "single-prime Bessel MGF", abs(mean - exact) <= 4 * se,
                   f"{mean:.5f} vs {exact:.5f} (se {se:.1e})")]


def _scan():
    chars = enumerate_characters(5)
    cfg = ScanConfig(make_tuple([chars[1], chars[2]]), 0.75, 1e4, 1e4 + 200, 0.05, renorm_interval=512)
    res = scan(cfg, [(0.5, 0.5)], store_every=1)
    ks = (0, 511, 512, 1777, cfg.grid_count - 1)
    err = max(float(np.max(np.abs(res.values[k] - evaluate_direct(cfg, k)))) for k in ks)
    recount = int(np.all(res.values > 0.5, axis=1).sum())
    return [
        _check("scan", "incremental against direct", err < 1e-9, f"{err:.2e}"),
        _check("scan", "counter against recount", recount == int(res.exceedance_counts[0])),
    ]


SUITE_FUNCS = {
    "characters": _characters,
    "special": _special,
    "factors": _factors,
    "tails": _tails,
    "model": _model,
    "scan": _scan,
}


def run_suite(name: str) -> list[dict]:
    if name == "all":
        return [c for f in SUITE_FUNCS.values() for c in f()]
    return SUITE_FUNCS[name]()
