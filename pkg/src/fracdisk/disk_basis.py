"""Disk polynomial basis, coefficient containers and weighted Sobolev norms.

A basis function with index ``(l, n, mu)`` and Jacobi parameter ``gamma`` is

    phi(x) = H_{l,mu}(x) * P_n^{(gamma, l)}(2 r^2 - 1)

where the solid harmonic ``H`` is ``1/2`` for ``l = 0``, ``r^l cos(l phi)`` for
``mu = +1`` and ``r^l sin(l phi)`` for ``mu = -1``. The index ``(0, 0..., -1)``
is not a member of the basis.

Coefficients live on a rectangular grid of shape ``(2, L + 1, N + 1)``; the
first axis holds ``mu = +1`` at position 0 and ``mu = -1`` at position 1. The
slots with ``l = 0`` and ``mu = -1`` are always zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from .errors import DomainError, InvalidIndexError, RepresentationError
from .specfun import jacobi_norm_sq, jacobi_table, log_gamma_ratio

MU_SIGNS = np.array([1, -1])


def mu_slot(mu: int) -> int:
    """Position of ``mu`` along the first coefficient axis."""
    if mu == 1:
        return 0
    if mu == -1:
        return 1
    raise InvalidIndexError(f"mu must be +1 or -1, got {mu!r}")


class BasisIndex(NamedTuple):
    l: int
    n: int
    mu: int

    def validate(self) -> "BasisIndex":
        if self.l < 0 or self.n < 0:
            raise InvalidIndexError(f"negative index in {tuple(self)}")
        mu_slot(self.mu)
        if self.l == 0 and self.mu == -1:
            raise InvalidIndexError("index (0, n, -1) is not a basis member")
        return self


def valid_mask(L: int, N: int) -> np.ndarray:
    """Boolean mask of basis members on the ``(2, L + 1, N + 1)`` grid."""
    mask = np.ones((2, L + 1, N + 1), dtype=bool)
    mask[1, 0, :] = False
    return mask


def index_grids(L: int, N: int):
    """Integer arrays ``(l, n, mu)`` broadcast to the coefficient grid shape."""
    l = np.arange(L + 1)[None, :, None] * np.ones((2, 1, N + 1), dtype=int)
    n = np.arange(N + 1)[None, None, :] * np.ones((2, L + 1, 1), dtype=int)
    mu = MU_SIGNS[:, None, None] * np.ones((1, L + 1, N + 1), dtype=int)
    return l, n, mu


def mode_list(L: int, N: int) -> list[BasisIndex]:
    """Basis members of the truncation in grid (flattened C) order."""
    mask = valid_mask(L, N)
    out = []
    for s, l, n in zip(*np.nonzero(mask)):
        out.append(BasisIndex(int(l), int(n), int(MU_SIGNS[s])))
    return out


def harmonic_eval(l: int, mu: int, x, y):
    """Solid harmonic ``H_{l,mu}`` at Cartesian points.

    Returns 0 for ``l < 0`` and for ``(0, -1)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mu_slot(mu)
    if l < 0 or (l == 0 and mu == -1):
        return np.zeros(np.broadcast(x, y).shape)
    if l == 0:
        return np.full(np.broadcast(x, y).shape, 0.5)
    z = (x + 1j * y) ** l
    return z.real if mu == 1 else z.imag


def harmonic_table(L: int, r, phi) -> np.ndarray:
    """All harmonics up to degree ``L`` at polar points, shape ``(2, L + 1) + shape(r)``."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(r, phi).shape
    ls = np.arange(L + 1).reshape((-1,) + (1,) * len(shape))
    radial = np.broadcast_to(r, shape)[None] ** ls
    out = np.empty((2, L + 1) + shape)
    out[0] = radial * np.cos(ls * phi)
    out[1] = radial * np.sin(ls * phi)
    out[0, 0] = 0.5
    out[1, 0] = 0.0
    return out


def _check_disk(r):
    if np.any(np.asarray(r) > 1.0 + 1e-14):
        raise DomainError("evaluation point outside the closed unit disk")


def basis_eval(idx: BasisIndex, gamma: float, x, y):
    """Evaluate ``phi_{l,n,mu}^{gamma}`` at Cartesian points (zero for negative l or n)."""
    l, n, mu = idx
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rr = x * x + y * y
    _check_disk(np.sqrt(rr))
    if l < 0 or n < 0:
        return np.zeros(np.broadcast(x, y).shape)
    rho = 2.0 * rr - 1.0
    return harmonic_eval(l, mu, x, y) * jacobi_table(n, gamma, l, rho)[n]


def basis_table(gamma: float, L: int, N: int, r, phi) -> np.ndarray:
    """Every basis function of the truncation at polar points.

    Returns:
        Array of shape ``(2, L + 1, N + 1) + shape(r)``; non-member slots are zero.
    """
    r = np.asarray(r, dtype=float)
    _check_disk(r)
    harm = harmonic_table(L, r, phi)
    rho = 2.0 * np.broadcast_to(r, harm.shape[2:]) ** 2 - 1.0
    out = np.empty((2, L + 1, N + 1) + harm.shape[2:])
    for l in range(L + 1):
        jac = jacobi_table(N, gamma, l, rho)
        out[:, l] = harm[:, l, None] * jac[None]
    return out


def _angular_constant(l, mu):
    l = np.asarray(l)
    return np.where(l == 0, np.pi / 2.0, np.pi)


def basis_norm_sq(l, n, mu, beta: float):
    """Squared norm of ``phi_{l,n,mu}^{beta}`` in ``L^2`` with weight ``(1 - r^2)^beta``.

    Arrays are accepted for ``l``, ``n`` and ``mu``.

    Raises:
        InvalidIndexError: for negative indices or ``(0, n, -1)``.
        DomainError: if ``beta <= -1``.
    """
    l = np.asarray(l)
    n = np.asarray(n)
    mu = np.asarray(mu)
    if np.any(l < 0) or np.any(n < 0) or np.any((mu != 1) & (mu != -1)):
        raise InvalidIndexError("invalid basis index")
    if np.any((l == 0) & (mu == -1)):
        raise InvalidIndexError("index (0, n, -1) is not a basis member")
    if not beta > -1.0:
        raise DomainError(f"weight exponent must exceed -1, got {beta}")
    out = _angular_constant(l, mu) * 2.0 ** (-(beta + l + 2.0)) * jacobi_norm_sq(n, beta, l)
    return float(out) if np.ndim(out) == 0 else out


def norm_sq_grid(beta: float, L: int, N: int) -> np.ndarray:
    """:func:`basis_norm_sq` on the coefficient grid, zero at non-member slots."""
    l, n, mu = index_grids(L, N)
    mask = valid_mask(L, N)
    out = np.zeros((2, L + 1, N + 1))
    out[mask] = basis_norm_sq(l[mask], n[mask], mu[mask], beta)
    return out


def sobolev_weight(L: int, N: int, s: float) -> np.ndarray:
    """Per-mode factor ``((n + 1)(n + l + 1))^s`` on the coefficient grid."""
    l, n, _ = index_grids(L, N)
    return ((n + 1.0) * (n + l + 1.0)) ** s


# Closed-form norm ratios. Each returns ||shifted||^2 / ||phi_{l,n}^{gamma}||^2.

def _rising(start, count):
    """Product ``prod_{s=1}^{count} (start + s)`` as a log, for integer count >= 0."""
    return log_gamma_ratio([np.asarray(start, float) + count + 1.0], [np.asarray(start, float) + 1.0])


def norm_ratio_weight_shift(l, n, gamma: float, k: int):
    """Ratio ``||phi_{l,n}^{gamma+k}||^2 / ||phi_{l,n}^{gamma}||^2`` for integer ``k >= 0``."""
    l = np.asarray(l, float)
    n = np.asarray(n, float)
    base = 2.0 * n + gamma + l + 1.0
    log_r = np.log(base) - np.log(base + k) + _rising(n + gamma, k) - _rising(n + gamma + l, k)
    return np.exp(log_r)


def norm_ratio_raise(l, n, gamma: float, j: int, m: int, mu: int = 1):
    """Ratio ``||phi_{l+j,n+m}^{gamma}||^2 / ||phi_{l,n}^{gamma}||^2`` for ``j, m >= 0``."""
    l = np.asarray(l, float)
    n = np.asarray(n, float)
    ang = _angular_constant(l + j, mu) / _angular_constant(l, mu)
    log_r = (
        np.log(2.0 * n + gamma + l + 1.0)
        - np.log(2.0 * n + 2.0 * m + gamma + l + j + 1.0)
        + _rising(n + gamma, m)
        - _rising(n, m)
        + _rising(n + l, m + j)
        - _rising(n + gamma + l, m + j)
    )
    return ang * np.exp(log_r)


def norm_ratio_lower(l, n, gamma: float, j: int, m: int, mu: int = 1):
    """Ratio ``||phi_{l-j,n+m}^{gamma}||^2 / ||phi_{l,n}^{gamma}||^2`` for ``0 <= j <= min(l, m)``."""
    l = np.asarray(l, float)
    n = np.asarray(n, float)
    if j > m or np.any(j > l):
        raise DomainError("lowering needs j <= m and j <= l")
    ang = _angular_constant(l - j, mu) / _angular_constant(l, mu)
    log_r = (
        np.log(2.0 * n + gamma + l + 1.0)
        - np.log(2.0 * n + 2.0 * m + gamma + l - j + 1.0)
        + _rising(n + gamma, m)
        - _rising(n, m)
        + _rising(n + l, m - j)
        - _rising(n + gamma + l, m - j)
    )
    return ang * np.exp(log_r)


@dataclass(frozen=True, eq=False)
class CoeffVec:
    """Finite expansion ``(1 - r^2)^prefactor * sum a_{l,n,mu} phi_{l,n,mu}^{gamma}``.

    Attributes:
        gamma: Jacobi parameter of the basis.
        prefactor: Exponent of the weight ``(1 - r^2)`` multiplying the sum; 0 for none.
        coeffs: Read-only array of shape ``(2, L + 1, N + 1)``.
    """

    gamma: float
    prefactor: float
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != 2:
            raise RepresentationError(f"coefficient grid must have shape (2, L+1, N+1), got {arr.shape}")
        if np.any(arr[1, 0, :] != 0.0):
            raise InvalidIndexError("nonzero coefficient at index (0, n, -1)")
        arr.setflags(write=False)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "prefactor", float(self.prefactor))
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, gamma, prefactor, L, N):
        return cls(gamma, prefactor, np.zeros((2, L + 1, N + 1)))

    @classmethod
    def from_modes(cls, modes: Mapping, gamma, prefactor=0.0, L=None, N=None):
        """Build from ``{(l, n, mu): value}``; truncation defaults to the smallest enclosing one."""
        idx = [BasisIndex(*k).validate() for k in modes]
        L = max([i.l for i in idx], default=0) if L is None else L
        N = max([i.n for i in idx], default=0) if N is None else N
        arr = np.zeros((2, L + 1, N + 1))
        for i, v in zip(idx, modes.values()):
            if i.l > L or i.n > N:
                raise InvalidIndexError(f"index {tuple(i)} outside truncation ({L}, {N})")
            arr[mu_slot(i.mu), i.l, i.n] = v
        return cls(gamma, prefactor, arr)

    @property
    def L(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def N(self) -> int:
        return self.coeffs.shape[2] - 1

    def get(self, l, n, mu) -> float:
        if l < 0 or n < 0 or l > self.L or n > self.N:
            return 0.0
        return float(self.coeffs[mu_slot(mu), l, n])

    def modes(self) -> Iterator[tuple[BasisIndex, float]]:
        """Nonzero entries in grid order."""
        for s, l, n in zip(*np.nonzero(self.coeffs)):
            yield BasisIndex(int(l), int(n), int(MU_SIGNS[s])), float(self.coeffs[s, l, n])

    def with_truncation(self, L, N) -> "CoeffVec":
        """Zero-pad or cut to a new rectangle."""
        arr = np.zeros((2, L + 1, N + 1))
        lc, nc = min(L, self.L), min(N, self.N)
        arr[:, : lc + 1, : nc + 1] = self.coeffs[:, : lc + 1, : nc + 1]
        return CoeffVec(self.gamma, self.prefactor, arr)

    def _aligned(self, other):
        if not isinstance(other, CoeffVec):
            return NotImplemented
        if self.gamma != other.gamma or self.prefactor != other.prefactor:
            raise RepresentationError(
                f"cannot combine (gamma={self.gamma}, prefactor={self.prefactor}) "
                f"with (gamma={other.gamma}, prefactor={other.prefactor})"
            )
        L, N = max(self.L, other.L), max(self.N, other.N)
        return self.with_truncation(L, N).coeffs, other.with_truncation(L, N).coeffs

    def __add__(self, other):
        pair = self._aligned(other)
        if pair is NotImplemented:
            return pair
        return CoeffVec(self.gamma, self.prefactor, pair[0] + pair[1])

    def __sub__(self, other):
        pair = self._aligned(other)
        if pair is NotImplemented:
            return pair
        return CoeffVec(self.gamma, self.prefactor, pair[0] - pair[1])

    def __mul__(self, scalar):
        return CoeffVec(self.gamma, self.prefactor, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def norm_sq_grid(self) -> np.ndarray:
        return norm_sq_grid(self.gamma, self.L, self.N)

    def l2_norm_sq(self) -> float:
        """``sum a^2 ||phi||^2_gamma``, the weighted L^2 norm of the polynomial part."""
        return float(np.sum(self.coeffs**2 * self.norm_sq_grid()))

    def evaluate(self, x, y):
        """Pointwise value including the weight prefactor.

        Raises:
            DomainError: for points outside the closed unit disk.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        rr = x * x + y * y
        _check_disk(np.sqrt(rr))
        rho = 2.0 * rr - 1.0
        phi = np.arctan2(y, x)
        harm = harmonic_table(self.L, np.sqrt(rr), phi)
        total = np.zeros(rr.shape)
        for l in range(self.L + 1):
            if not np.any(self.coeffs[:, l]):
                continue
            jac = jacobi_table(self.N, self.gamma, l, rho)
            radial = np.tensordot(self.coeffs[:, l], jac, axes=([1], [0]))
            total += harm[0, l] * radial[0] + harm[1, l] * radial[1]
        if self.prefactor != 0.0:
            total = total * np.clip(1.0 - rr, 0.0, None) ** self.prefactor
        return total


@dataclass(frozen=True, eq=False)
class VecCoeffField:
    """Two-component field whose components share Jacobi parameter and prefactor."""

    x: CoeffVec
    y: CoeffVec

    def __post_init__(self):
        if (self.x.gamma, self.x.prefactor) != (self.y.gamma, self.y.prefactor):
            raise RepresentationError("vector field components must share gamma and prefactor")
        if self.x.coeffs.shape != self.y.coeffs.shape:
            L, N = max(self.x.L, self.y.L), max(self.x.N, self.y.N)
            object.__setattr__(self, "x", self.x.with_truncation(L, N))
            object.__setattr__(self, "y", self.y.with_truncation(L, N))

    @property
    def gamma(self):
        return self.x.gamma

    @property
    def prefactor(self):
        return self.x.prefactor

    def __sub__(self, other):
        return VecCoeffField(self.x - other.x, self.y - other.y)

    def __add__(self, other):
        return VecCoeffField(self.x + other.x, self.y + other.y)

    def l2_norm_sq(self) -> float:
        return self.x.l2_norm_sq() + self.y.l2_norm_sq()


def sobolev_norm(u: CoeffVec, s: float) -> float:
    """Weighted Sobolev norm ``sqrt(sum ((n+1)(n+l+1))^s a^2 ||phi||^2_gamma)``.

    The Jacobi parameter ``gamma`` of ``u`` doubles as the weight exponent.
    """
    w = sobolev_weight(u.L, u.N, s)
    return float(np.sqrt(np.sum(w * u.coeffs**2 * u.norm_sq_grid())))


def vector_sobolev_norm(field: VecCoeffField, s: float) -> float:
    return float(np.hypot(sobolev_norm(field.x, s), sobolev_norm(field.y, s)))
