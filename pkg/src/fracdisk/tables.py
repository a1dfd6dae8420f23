"""Plain-text output formats: commented CSV tables and JSON reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .disk_basis import CoeffVec, mu_slot
from .errors import ConfigError


def fmt(x) -> str:
    """Shortest round-trip text for a float; ints and strings stay as they are."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return repr(float(x))


def header_lines(meta: dict) -> list[str]:
    return ["# " + " ".join(f"{k}={v}" for k, v in meta.items())]


def csv_text(columns: list[str], rows, meta: dict) -> str:
    lines = header_lines(meta) + [",".join(columns)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def coeff_table_text(u: CoeffVec, meta: dict) -> str:
    """Nonzero coefficients as ``l,n,mu,coefficient`` rows under a representation header."""
    rep = {"gamma": fmt(u.gamma), "prefactor": fmt(u.prefactor), "L": u.L, "N": u.N}
    lines = ["# fracdisk coefficient table"] + header_lines(rep) + header_lines(meta) + ["l,n,mu,coefficient"]
    lines += [f"{i.l},{i.n},{i.mu},{fmt(v)}" for i, v in u.modes()]
    return "\n".join(lines) + "\n"


def read_coeff_table(path) -> tuple[CoeffVec, dict]:
    """Inverse of :func:`coeff_table_text`; returns the vector and all header fields."""
    meta = {}
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
            continue
        if line == "l,n,mu,coefficient":
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ConfigError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            rows.append((int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: malformed row {line!r}") from None
    try:
        gamma, pre = float(meta["gamma"]), float(meta["prefactor"])
        L, N = int(meta["L"]), int(meta["N"])
    except (KeyError, ValueError):
        raise ConfigError(f"{path}: header lacks gamma, prefactor, L or N") from None
    arr = np.zeros((2, L + 1, N + 1))
    for l, n, mu, v in rows:
        if not (0 <= l <= L and 0 <= n <= N):
            raise ConfigError(f"{path}: index ({l},{n},{mu}) outside truncation")
        arr[mu_slot(mu), l, n] = v
    return CoeffVec(gamma, pre, arr), meta


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def json_text(obj: dict) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"
