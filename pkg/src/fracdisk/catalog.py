"""Closed catalogs of diffusivity tensors and right-hand sides, parsed from selector strings.

Diffusivity selectors::

    identity
    diag:k1,k2               constant diagonal
    rotated:k1,k2,theta      R(theta) diag(k1, k2) R(theta)^T
    radial:eps               (1 + eps r^2) I
    angular:eps              (1 + eps r^2 cos 2 phi) I

Right-hand side selectors::

    mode:l,n,mu[,amp]        amp * phi_{l,n,mu} in the alpha/2 basis
    poly:i,j[,amp]           amp * x^i y^j
    gauss:c                  exp(-c r^2)
    absx[:amp]               amp * |x|  (limited smoothness)
    const:c
"""

from __future__ import annotations

import numpy as np

from .disk_basis import BasisIndex, CoeffVec
from .errors import ConfigError, InvalidIndexError
from .quadrature import DiffusivitySpec


def _floats(text: str, count: tuple, selector: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()] if text else []
    if len(parts) not in count:
        raise ConfigError(f"selector {selector!r} expects {' or '.join(map(str, count))} parameters, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"selector {selector!r}: non-numeric parameter ({exc})") from None


def parse_K(selector: str) -> DiffusivitySpec:
    """Build a :class:`DiffusivitySpec` from a catalog selector."""
    name, _, arg = selector.strip().partition(":")
    zero = lambda x, y: 0.0 * np.asarray(x, float)
    if name == "identity":
        _floats(arg, (0,), selector)
        return DiffusivitySpec.constant_tensor(1.0, 0.0, 1.0, "identity")
    if name == "diag":
        k1, k2 = _floats(arg, (2,), selector)
        return DiffusivitySpec.constant_tensor(k1, 0.0, k2, selector)
    if name == "rotated":
        k1, k2, th = _floats(arg, (3,), selector)
        c, s = np.cos(th), np.sin(th)
        return DiffusivitySpec.constant_tensor(
            c * c * k1 + s * s * k2, c * s * (k1 - k2), s * s * k1 + c * c * k2, selector
        )
    if name == "radial":
        (eps,) = _floats(arg, (1,), selector)
        k = lambda x, y: 1.0 + eps * (np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2)
        return DiffusivitySpec(k, zero, k, selector, False, 2, {"eps": eps})
    if name == "angular":
        (eps,) = _floats(arg, (1,), selector)
        k = lambda x, y: 1.0 + eps * (np.asarray(x, float) ** 2 - np.asarray(y, float) ** 2)
        return DiffusivitySpec(k, zero, k, selector, False, 2, {"eps": eps})
    raise ConfigError(f"unknown diffusivity selector {selector!r}")


def parse_mode(text: str) -> BasisIndex:
    try:
        l, n, mu = (int(p) for p in text.split(","))
        return BasisIndex(l, n, mu).validate()
    except (ValueError, InvalidIndexError) as exc:
        raise ConfigError(f"bad basis index {text!r}: {exc}") from None


def parse_rhs(selector: str, alpha: float):
    """Right-hand side as a :class:`CoeffVec` (mode selector) or a callable ``f(x, y)``."""
    name, _, arg = selector.strip().partition(":")
    h = alpha / 2.0
    if name == "mode":
        parts = arg.split(",")
        if len(parts) not in (3, 4):
            raise ConfigError(f"selector {selector!r} expects l,n,mu[,amp]")
        idx = parse_mode(",".join(parts[:3]))
        amp = _floats(parts[3], (1,), selector)[0] if len(parts) == 4 else 1.0
        return CoeffVec.from_modes({idx: amp}, h, 0.0)
    if name == "poly":
        vals = _floats(arg, (2, 3), selector)
        i, j = int(vals[0]), int(vals[1])
        if i < 0 or j < 0 or i != vals[0] or j != vals[1]:
            raise ConfigError(f"selector {selector!r}: exponents must be non-negative integers")
        amp = vals[2] if len(vals) == 3 else 1.0
        return lambda x, y: amp * np.asarray(x, float) ** i * np.asarray(y, float) ** j
    if name == "gauss":
        (c,) = _floats(arg, (1,), selector)
        return lambda x, y: np.exp(-c * (np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2))
    if name == "absx":
        amp = _floats(arg, (1,), selector)[0] if arg else 1.0
        return lambda x, y: amp * np.abs(np.asarray(x, float)) + 0.0 * np.asarray(y, float)
    if name == "const":
        (c,) = _floats(arg, (1,), selector)
        return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, c)
    raise ConfigError(f"unknown right-hand side selector {selector!r}")


def parse_modes(text: str, alpha: float, L: int | None = None, N: int | None = None) -> CoeffVec:
    """Solution-representation vector from ``"l,n,mu:amp;l,n,mu:amp"``."""
    modes = {}
    for item in filter(None, (p.strip() for p in text.split(";"))):
        idx_text, _, amp = item.partition(":")
        idx = parse_mode(idx_text)
        try:
            modes[idx] = float(amp) if amp else 1.0
        except ValueError:
            raise ConfigError(f"bad amplitude in {item!r}") from None
    if not modes:
        raise ConfigError(f"no modes in {text!r}")
    h = alpha / 2.0
    Lm = max(i.l for i in modes)
    Nm = max(i.n for i in modes)
    return CoeffVec.from_modes(modes, h, h, L=max(Lm, L or 0), N=max(Nm, N or 0))
