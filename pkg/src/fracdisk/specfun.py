"""Special-function kernel: log-gamma, gamma ratios, Jacobi polynomials, Gauss-Jacobi rules.

Log-gamma, Pochhammer symbols and Gauss-Jacobi nodes come from
:mod:`scipy.special`; Jacobi
polynomials are evaluated here with the forward three-term recurrence, which
produces every degree up to ``n`` in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DomainError


def ln_gamma(x):
    """Natural log of the gamma function for strictly positive arguments.

    Args:
        x: Scalar or array of reals, all > 0.

    Returns:
        ``log Gamma(x)`` with the same shape as ``x`` (a float for scalar input).

    Raises:
        DomainError: if any argument is non-positive or not finite.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"ln_gamma needs finite x > 0, got {x!r}")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


# Pairs whose arguments differ by at most this much use the Pochhammer symbol,
# which avoids cancelling two large log-gamma values.
_POCH_SPAN = 16.0


def _log_pair(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    ln_gamma(num)
    ln_gamma(den)
    num, den = np.broadcast_arrays(num, den)
    delta = num - den
    near = np.abs(delta) <= _POCH_SPAN
    out = np.empty(num.shape)
    out[near] = np.log(special.poch(den[near], delta[near]))
    out[~near] = special.gammaln(num[~near]) - special.gammaln(den[~near])
    return out if out.ndim else float(out)


def log_gamma_ratio(numerator: Sequence, denominator: Sequence):
    """Log of ``prod Gamma(numerator) / prod Gamma(denominator)``.

    Arguments may be arrays; they are broadcast against each other. Entries
    are paired by position, and a pair with close arguments is evaluated as a
    Pochhammer symbol, so ratios such as ``Gamma(n + 0.75) / Gamma(n)`` stay
    accurate to rounding even for ``n`` near ``1e9``.
    """
    total = 0.0
    for num, den in zip(numerator, denominator):
        total = total + _log_pair(num, den)
    k = min(len(numerator), len(denominator))
    for arg in numerator[k:]:
        total = total + ln_gamma(arg)
    for arg in denominator[k:]:
        total = total - ln_gamma(arg)
    return total


@dataclass(frozen=True)
class GammaRatio:
    """A ratio of gamma-function products with strictly positive arguments."""

    numerator: tuple
    denominator: tuple

    def __post_init__(self):
        object.__setattr__(self, "numerator", tuple(float(v) for v in self.numerator))
        object.__setattr__(self, "denominator", tuple(float(v) for v in self.denominator))
        for v in self.numerator + self.denominator:
            if not np.isfinite(v) or v <= 0.0:
                raise DomainError(f"gamma ratio arguments must be > 0, got {v}")

    def log_value(self) -> float:
        return float(log_gamma_ratio(self.numerator, self.denominator))


def gamma_ratio(ratio: GammaRatio) -> float:
    """Evaluate a :class:`GammaRatio` as ``exp`` of a sum of log-gammas.

    The result never overflows for moderate ratios even when the individual
    gamma values would.
    """
    return float(np.exp(ratio.log_value()))


def _check_params(a, b):
    if not (np.all(np.asarray(a) > -1.0) and np.all(np.asarray(b) > -1.0)):
        raise DomainError(f"Jacobi parameters need a > -1 and b > -1, got a={a}, b={b}")


def jacobi_table(nmax: int, a: float, b: float, t) -> np.ndarray:
    """Values of ``P_k^{(a,b)}(t)`` for every degree ``k = 0..nmax``.

    Args:
        nmax: Highest degree (>= 0).
        a, b: Jacobi parameters, both > -1.
        t: Evaluation points, any shape.

    Returns:
        Array of shape ``(nmax + 1,) + shape(t)``.
    """
    _check_params(a, b)
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = 0.5 * ((a + b + 2.0) * t + (a - b))
    ab = a + b
    a2b2 = a * a - b * b
    for k in range(2, nmax + 1):
        c = 2.0 * k + ab
        lead = 2.0 * k * (k + ab) * (c - 2.0)
        coef1 = (c - 1.0) * (c * (c - 2.0) * t + a2b2)
        coef2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c
        out[k] = (coef1 * out[k - 1] - coef2 * out[k - 2]) / lead
    return out


def jacobi_eval(n: int, a: float, b: float, t):
    """Jacobi polynomial ``P_n^{(a,b)}(t)``.

    Negative degrees evaluate to zero, which lets index-shifting formulas drop
    out-of-range terms without special cases.

    Raises:
        DomainError: if ``a <= -1`` or ``b <= -1``.
    """
    _check_params(a, b)
    t_arr = np.asarray(t, dtype=float)
    if n < 0:
        val = np.zeros_like(t_arr)
    else:
        val = jacobi_table(int(n), a, b, t_arr)[n]
    return float(val) if val.ndim == 0 else val


def jacobi_norm_sq(n, a, b):
    """Squared norm of ``P_n^{(a,b)}`` in ``L^2([-1,1], (1-t)^a (1+t)^b dt)``.

    ``n``, ``a`` and ``b`` may be arrays; they are broadcast together.
    """
    _check_params(a, b)
    n = np.asarray(n, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(n < 0):
        raise DomainError("jacobi_norm_sq needs n >= 0")
    # n = 0 uses Gamma(a+b+2) directly since Gamma(a+b+1) can have a negative argument
    safe_n = np.where(n == 0, 1.0, n)
    general = np.exp(
        (a + b + 1.0) * np.log(2.0)
        - np.log(2.0 * safe_n + a + b + 1.0)
        + log_gamma_ratio([safe_n + a + 1.0, safe_n + b + 1.0], [safe_n + 1.0, safe_n + a + b + 1.0])
    )
    zero = np.exp((a + b + 1.0) * np.log(2.0) + log_gamma_ratio([a + 1.0, b + 1.0], [a + b + 2.0]))
    out = np.where(n == 0, zero, general)
    return float(out) if out.ndim == 0 else out


def jacobi_norm(n, a, b):
    """Norm (square root of :func:`jacobi_norm_sq`)."""
    return np.sqrt(jacobi_norm_sq(n, a, b))


def gauss_jacobi_rule(m: int, a: float, b: float):
    """Gauss-Jacobi nodes and weights for ``(1-t)^a (1+t)^b`` on ``[-1, 1]``.

    Exact for polynomials of degree ``<= 2m - 1``.

    Returns:
        ``(nodes, weights)`` with nodes ascending and weights positive.
    """
    if m < 1:
        raise DomainError(f"rule size must be >= 1, got {m}")
    _check_params(a, b)
    nodes, weights = special.roots_jacobi(int(m), a, b)
    order = np.argsort(nodes)
    return nodes[order], weights[order]
