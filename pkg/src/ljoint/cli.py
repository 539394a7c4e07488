"""Command-line entry point.

Every run writes one JSON summary line to stdout; bulk rows (characters,
search hits, samples, stored scan values) go to ``--output`` as JSON lines
or CSV.  Exit codes: 0 ok, 1 domain error, 2 usage error, 3 budget refusal.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .characters import (
    character,
    character_by_index,
    enumerate_characters,
    make_tuple,
    unit_group,
)
from .errors import BudgetError, LjointError
from .factors import Weights, factor_report, find_alpha, search_negative_xi
from .model import RandomModelConfig, abs_moment, mc_joint_tail, mc_mgf, sample_model, variance_sum
from .scan import ScanConfig, batch_stderr, empirical_psi, find_simultaneous_max, scan
from .special import g_sigma
from .tails import predict_log_psi

THREADS_ENV = "LJOINT_THREADS"
EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("gsigma", "characters", "factors", "search", "predict", "mc", "scan", "verify")
SUITES = ("characters", "special", "factors", "tails", "model", "scan", "all")


class UsageError(Exception):
    pass


# -- value parsers ---------------------------------------------------------

def _real(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not a finite number")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise ValueError(f"{s!r} must be a positive integer")
    return v


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _split(s: str) -> list[str]:
    return [p for p in s.replace(",", " ").split() if p]


def _reals(s: str) -> list[float]:
    return [_real(p) for p in _split(s)]


def _vectors(s: str) -> list[list[float]]:
    """``"0.5,0.5;1,1"`` -> [[0.5, 0.5], [1.0, 1.0]]."""
    return [_reals(part) for part in s.split(";") if part.strip()]


def _char_spec(s: str) -> str:
    q, sep, lab = s.partition(":")
    if not sep or not q.strip().isdigit() or not lab:
        raise ValueError(f"character {s!r} must look like modulus:label")
    parse_character(s)
    return s.strip()


def _chars(s: str) -> list[str]:
    return [_char_spec(p) for p in _split(s)]


def _suite(s: str) -> str:
    if s not in SUITES:
        raise ValueError(f"suite must be one of {', '.join(SUITES)}")
    return s


def parse_character(spec: str):
    """``q:k`` is the k-th character in the canonical order, ``q:a.b`` a label vector."""
    q_text, _, lab = spec.strip().partition(":")
    q = int(q_text)
    if q < 1:
        raise ValueError("modulus must be positive")
    if "." in lab:
        return character(q, tuple(int(k) for k in lab.split(".") if k != ""))
    return character_by_index(q, int(lab))


@dataclass(frozen=True)
class Param:
    parse: Callable
    required: bool = False
    default: object = None
    help: str = ""


_SIGMA = Param(_real, True, help="real part sigma")
_CHARS = Param(_chars, True, help="characters as modulus:label, comma separated")
_THETAS = Param(_reals, help="twist angles, one per character (default 0)")

SCHEMA: dict[str, dict[str, Param]] = {
    "gsigma": {"sigma": _SIGMA, "epsabs": Param(_real, default=1e-10)},
    "characters": {"modulus": Param(_positive_int, True)},
    "factors": {
        "chars": _CHARS,
        "thetas": _THETAS,
        "sigma": _SIGMA,
        "weights": Param(_reals, help="weights alpha_j (default all 1)"),
        "alpha": Param(_real, help="use weights (alpha, 1, ..., 1)"),
        "find_alpha": Param(_bool, default=False, help="search the smallest working alpha"),
    },
    "search": {
        "modulus": Param(_positive_int, True),
        "r": Param(_positive_int, True),
        "sigma": Param(_reals, True, help="sigma grid"),
        "thetas": _THETAS,
        "budget": Param(_positive_int, default=10**6),
    },
    "predict": {
        "chars": _CHARS,
        "thetas": _THETAS,
        "sigma": _SIGMA,
        "v": Param(_real, True, help="common large-value scale V"),
        "weights": Param(_reals, help="weights (default: find_alpha)"),
        "t": Param(_real, help="height T for the range warning"),
    },
    "mc": {
        "chars": _CHARS,
        "thetas": _THETAS,
        "sigma": _SIGMA,
        "prime_cutoff": Param(_real, True),
        "samples": Param(_positive_int, True),
        "thresholds": Param(_vectors, default=[], help="vectors separated by ';'"),
        "mgf_at": Param(_vectors, default=[], help="points x for E exp(x.S)"),
        "moments": Param(_reals, default=[], help="k values for E|P_j|^(2k)"),
    },
    "scan": {
        "chars": _CHARS,
        "thetas": _THETAS,
        "sigma": _SIGMA,
        "t_start": Param(_real, True),
        "t_end": Param(_real),
        "step": Param(_real, default=0.05),
        "prime_cutoff": Param(_real),
        "include_prime_squares": Param(_bool, default=False),
        "renorm_interval": Param(_positive_int, default=4096),
        "thresholds": Param(_vectors, default=[], help="vectors separated by ';'"),
        "store_every": Param(_positive_int),
    },
    "verify": {"suite": Param(_suite, True)},
}

# options shared by all commands; they are spec fields, not parameters
_GLOBAL = ("seed", "output", "format", "threads")


@dataclass
class ExperimentSpec:
    command: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None
    format: str = "record"
    threads: int = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(key: str) -> str:
    return "--" + key.replace("_", "-")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ljoint", description="Joint large values of Dirichlet L-functions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help="flat key=value file; explicit flags win")
        sp.add_argument("--seed", help="64-bit unsigned seed (default 0)")
        sp.add_argument("--output", help="bulk output path")
        sp.add_argument("--format", choices=("record", "csv"))
        sp.add_argument("--threads", help=f"worker cap (env {THREADS_ENV})")
        for key, p in schema.items():
            sp.add_argument(_flag(key), dest=key, nargs="+", help=p.help)
    return parser


def _read_config(path: str) -> dict[str, str]:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key=value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def parse_cli(argv) -> ExperimentSpec:
    parser = _build_parser()
    ns = vars(parser.parse_args(list(argv)))
    command = ns.pop("command", None)
    if command is None:
        raise UsageError(f"a command is required: {', '.join(COMMANDS)}")
    schema = SCHEMA[command]
    raw: dict[str, str] = {}
    if "config" in ns:
        cfg = _read_config(ns.pop("config"))
        unknown = sorted(set(cfg) - set(schema) - set(_GLOBAL))
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        raw.update(cfg)
    for key, val in ns.items():
        raw[key] = " ".join(val) if isinstance(val, list) else val

    params = {}
    missing = []
    for key, p in schema.items():
        if key in raw:
            try:
                params[key] = p.parse(raw[key])
            except (ValueError, TypeError, LjointError) as exc:
                raise UsageError(f"{_flag(key)}: {exc}") from exc
        elif p.required:
            missing.append(_flag(key))
        else:
            params[key] = p.default
    if missing:
        raise UsageError(f"{command}: missing required parameters: {', '.join(missing)}")

    try:
        seed = int(raw.get("seed", 0))
    except ValueError as exc:
        raise UsageError(f"--seed: {exc}") from exc
    if not 0 <= seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    fmt = raw.get("format", "record")
    if fmt not in ("record", "csv"):
        raise UsageError("--format must be record or csv")
    threads_text = raw.get("threads", os.environ.get(THREADS_ENV))
    try:
        threads = _positive_int(threads_text) if threads_text else (os.cpu_count() or 1)
    except ValueError as exc:
        raise UsageError(f"--threads: {exc}") from exc
    return ExperimentSpec(command, params, seed, raw.get("output"), fmt, threads)


# -- serialization ---------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def dump_record(record: dict) -> str:
    return json.dumps(_jsonable(record), separators=(", ", ": "))


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows: list[dict], fh) -> None:
    if not rows:
        return
    w = csv.writer(fh, lineterminator="\n")
    header = list(rows[0])
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(row[k]) for k in header])


def read_csv(fh) -> list[dict]:
    """Parse CSV written by write_csv; numeric cells come back as int or float."""

    def conv(s):
        for f in (int, float):
            try:
                return f(s)
            except ValueError:
                pass
        return s

    return [{k: conv(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _write_bulk(spec: ExperimentSpec, rows: list[dict]) -> None:
    if not spec.output_path:
        return
    with open(spec.output_path, "w", newline="") as fh:
        if spec.format == "csv":
            write_csv(rows, fh)
        else:
            for row in rows:
                fh.write(dump_record(row) + "\n")


# -- commands --------------------------------------------------------------

def _tuple_from(params):
    chars = [parse_character(c) for c in params["chars"]]
    return make_tuple(chars, params.get("thetas"))


def _cmd_gsigma(spec):
    p = spec.parameters
    c = g_sigma(p["sigma"], p["epsabs"])
    res = {"sigma": c.sigma, "g": c.g_value, "a": c.a_value, "error_estimate": c.quadrature_error_estimate}
    return res, [res]


def _cmd_characters(spec):
    q = spec.parameters["modulus"]
    if q > 10**5:
        raise BudgetError("modulus above 10^5 would build an oversized value table")
    g = unit_group(q)
    rows = []
    for i, chi in enumerate(enumerate_characters(q)):
        real = bool(np.all(np.abs(chi.values.imag) < 1e-12))
        rows.append({
            "index": i,
            "spec": f"{q}:" + ".".join(map(str, chi.label)),
            "conductor": chi.conductor,
            "primitive": chi.is_primitive,
            "principal": chi.is_principal,
            "real": real,
            "parity": 1 if chi(-1).real > 0 else -1,
        })
    res = {"modulus": q, "count": len(rows), "orders": list(g.orders), "generators": list(g.generators),
           "primitive_count": sum(r["primitive"] for r in rows)}
    return res, rows


def _cmd_factors(spec):
    p = spec.parameters
    tup = _tuple_from(p)
    w = None
    if p["find_alpha"]:
        w = find_alpha(tup, p["sigma"])
    elif p["alpha"] is not None:
        w = Weights.leading(p["alpha"], tup.r)
    elif p["weights"] is not None:
        w = Weights(tuple(p["weights"]))
    rep = factor_report(tup, p["sigma"], w)
    rows = [{"j": j, "xi_j": v} for j, v in enumerate(rep.xi_js)]
    return rep.to_record(), rows


def _cmd_search(spec):
    p = spec.parameters
    hits = search_negative_xi(p["modulus"], p["r"], p["sigma"], p["thetas"], p["budget"])
    rows = [h.to_record() for h in hits]
    return {"hits": len(hits), "best": rows[:10]}, rows


def _cmd_predict(spec):
    p = spec.parameters
    tup = _tuple_from(p)
    w = Weights(tuple(p["weights"])) if p["weights"] is not None else find_alpha(tup, p["sigma"])
    pred = predict_log_psi(tup, p["sigma"], w, p["v"], p["t"])
    rec = pred.to_record()
    rec["weights"] = list(w.as_array())
    return rec, [rec]


def _check_vectors(vecs, r, name):
    for v in vecs:
        if len(v) != r:
            raise UsageError(f"--{name}: each vector needs {r} entries")


def _cmd_mc(spec):
    p = spec.parameters
    tup = _tuple_from(p)
    _check_vectors(p["thresholds"], tup.r, "thresholds")
    _check_vectors(p["mgf_at"], tup.r, "mgf-at")
    cfg = RandomModelConfig(tup, p["sigma"], p["prime_cutoff"], p["samples"], spec.seed)
    if cfg.samples * tup.r > 10**9:
        raise BudgetError("samples x r above 10^9")
    dist = sample_model(cfg, threads=spec.threads)
    tails = [dict(threshold=list(th), **mc_joint_tail(dist, th)) for th in p["thresholds"]]
    mgfs = []
    for x in p["mgf_at"]:
        mean, se = mc_mgf(dist, x)
        mgfs.append({"x": list(x), "mean": mean, "stderr": se})
    moments = []
    for k in p["moments"]:
        for j in range(tup.r):
            m, se = abs_moment(dist, j, k)
            bound = math.gamma(k + 1) * variance_sum(tup, p["sigma"], j, p["prime_cutoff"]) ** k
            moments.append({"j": j, "k": k, "moment": m, "stderr": se, "bound": bound})
    rows = []
    if spec.output_path:
        rows = [{f"s{j}": float(v) for j, v in enumerate(s)} for s in dist.samples]
    return {"samples": dist.n, "tails": tails, "mgf": mgfs, "moments": moments}, rows


def _cmd_scan(spec):
    p = spec.parameters
    tup = _tuple_from(p)
    _check_vectors(p["thresholds"], tup.r, "thresholds")
    cfg = ScanConfig(
        tup, p["sigma"], p["t_start"], p["t_end"], p["step"], p["prime_cutoff"],
        p["include_prime_squares"], p["renorm_interval"],
    )
    res = scan(cfg, p["thresholds"], p["store_every"], threads=spec.threads)
    tails = []
    for th in p["thresholds"]:
        e = empirical_psi(res, th)
        e["batch_stderr"] = batch_stderr(res, th)
        tails.append(dict(threshold=list(th), **e))
    rec = {"grid_count": res.grid_count, "prime_cutoff": cfg.prime_cutoff, "tails": tails,
           "max_min": find_simultaneous_max(res), "caveats": list(res.caveats)}
    rows = []
    if res.values is not None:
        for t, v in zip(res.value_times, res.values):
            row = {"t": float(t)}
            row.update({f"s{j}": float(x) for j, x in enumerate(v)})
            rows.append(row)
    return rec, rows


def _cmd_verify(spec):
    from .verify import run_suite

    checks = run_suite(spec.parameters["suite"])
    failed = [c for c in checks if not c["ok"]]
    res = {"suite": spec.parameters["suite"], "checks": len(checks), "failed": len(failed),
           "failures": failed}
    if failed:
        res["status_override"] = EXIT_DOMAIN
    return res, checks


_DISPATCH = {
    "gsigma": _cmd_gsigma,
    "characters": _cmd_characters,
    "factors": _cmd_factors,
    "search": _cmd_search,
    "predict": _cmd_predict,
    "mc": _cmd_mc,
    "scan": _cmd_scan,
    "verify": _cmd_verify,
}


def run(spec: ExperimentSpec, stdout=None) -> int:
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    result, rows, code, error = None, [], EXIT_OK, None
    try:
        result, rows = _DISPATCH[spec.command](spec)
        code = result.pop("status_override", EXIT_OK)
    except UsageError as exc:
        code, error = EXIT_USAGE, str(exc)
    except BudgetError as exc:
        code, error = EXIT_BUDGET, str(exc)
    except (LjointError, ValueError, ArithmeticError) as exc:
        code, error = EXIT_DOMAIN, f"{type(exc).__name__}: {exc}"
    record = {
        "command": spec.command,
        "version": __version__,
        "seed": spec.seed,
        "parameters": dict(sorted(spec.parameters.items())),
        "threads": spec.threads,
        "format": spec.format,
        "output": spec.output_path,
        "exit_code": code,
        "wall_time": round(time.perf_counter() - t0, 6),
    }
    if error is not None:
        record["error"] = error
    else:
        record["result"] = result
        _write_bulk(spec, rows)
    stdout.write(dump_record(record) + "\n")
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_cli(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
