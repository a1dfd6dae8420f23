"""Disk quadrature, projection, diffusivity tensors and weighted Gram matrices.

Radial integrals use Gauss-Jacobi rules in ``rho = 2 r^2 - 1`` with the weight
``(1 - r^2)^beta`` folded into the rule, so the singular weight exponents near
``-1/2`` are integrated exactly. The angle uses the uniform trapezoid rule,
which is exact for trigonometric polynomials of degree below the node count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .disk_basis import CoeffVec, basis_table, norm_sq_grid, valid_mask
from .errors import DomainError, NotSPDError
from .specfun import gauss_jacobi_rule, jacobi_table


@dataclass(frozen=True)
class DiskRule:
    """Tensor rule for ``integral over the disk of (1 - r^2)^beta g(x) dx``.

    Attributes:
        beta: Weight exponent (> -1).
        rho: Radial nodes in ``rho = 2 r^2 - 1``.
        radial_weights: Gauss-Jacobi weights including the Jacobian ``2^{-beta} / 4``.
        n_phi: Number of equispaced angles.
    """

    beta: float
    rho: np.ndarray
    radial_weights: np.ndarray
    n_phi: int

    @classmethod
    def build(cls, beta: float, n_radial: int, n_phi: int) -> "DiskRule":
        if not beta > -1.0:
            raise DomainError(f"weight exponent must exceed -1, got {beta}")
        rho, w = gauss_jacobi_rule(n_radial, beta, 0.0)
        return cls(beta, rho, w * 2.0 ** (-beta) / 4.0, int(n_phi))

    @classmethod
    def for_truncation(cls, beta: float, L: int, N: int, extra: int = 0) -> "DiskRule":
        """Default sizes ``N + L + 8`` radial and ``2 L + 8`` angular nodes, plus ``extra`` each."""
        return cls.build(beta, N + L + 8 + extra, 2 * L + 8 + extra)

    @property
    def r(self) -> np.ndarray:
        return np.sqrt((1.0 + self.rho) / 2.0)

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    def grid(self):
        """Polar and Cartesian node arrays of shape ``(n_radial, n_phi)`` plus full weights."""
        r, phi = np.meshgrid(self.r, self.phi, indexing="ij")
        w = self.radial_weights[:, None] * (2.0 * np.pi / self.n_phi) * np.ones_like(phi)
        return r, phi, r * np.cos(phi), r * np.sin(phi), w

    def integrate(self, fn: Callable) -> float:
        """Integrate ``fn(x, y)`` against the weight."""
        _, _, x, y, w = self.grid()
        return float(np.sum(w * fn(x, y)))


def weighted_moments(rule: DiskRule, values: np.ndarray, gamma: float, L: int, N: int) -> np.ndarray:
    """Inner products ``integral (1-r^2)^beta g phi_{l,n,mu}^{gamma}`` for all modes.

    Args:
        rule: Quadrature rule; ``rule.beta`` is the weight exponent.
        values: ``g`` sampled on ``rule.grid()``, shape ``(n_radial, n_phi)``.

    Returns:
        Grid of shape ``(2, L + 1, N + 1)``, zero at non-member slots.

    The angular integrals are done first for every harmonic degree, then one
    radial Jacobi table per degree, so memory stays linear in the mode count.
    """
    phi = rule.phi
    ls = np.arange(L + 1)
    cos_t = np.cos(np.outer(ls, phi))
    sin_t = np.sin(np.outer(ls, phi))
    cos_t[0] = 0.5
    dphi = 2.0 * np.pi / rule.n_phi
    ang = np.stack([values @ cos_t.T, values @ sin_t.T]) * dphi  # (2, n_r, L+1)
    ang[1, :, 0] = 0.0
    r = rule.r
    out = np.zeros((2, L + 1, N + 1))
    for l in range(L + 1):
        jac = jacobi_table(N, gamma, l, rule.rho)  # (N+1, n_r)
        radial = rule.radial_weights * r**l
        out[:, l, :] = (ang[:, :, l] * radial) @ jac.T
    return out * valid_mask(L, N)


def project(f: Callable, gamma: float, L: int, N: int, extra: int = 16) -> CoeffVec:
    """Orthogonal projection of ``f(x, y)`` onto the ``gamma`` basis in ``L^2`` with weight ``(1-r^2)^gamma``.

    ``extra`` adds nodes in both directions for non-polynomial integrands.
    """
    rule = DiskRule.for_truncation(gamma, L, N, extra)
    _, _, x, y, _ = rule.grid()
    mom = weighted_moments(rule, np.asarray(f(x, y), dtype=float) * np.ones_like(x), gamma, L, N)
    nsq = norm_sq_grid(gamma, L, N)
    coeffs = np.divide(mom, nsq, out=np.zeros_like(mom), where=nsq > 0)
    return CoeffVec(gamma, 0.0, coeffs)


def _constant(value):
    return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(value))


@dataclass(frozen=True)
class DiffusivitySpec:
    """Symmetric 2x2 diffusivity tensor field.

    Attributes:
        k11, k12, k22: Callables ``(x, y) -> array``.
        name: Catalog selector echoed in outputs.
        constant: True when the tensor does not depend on position.
        poly_degree: Polynomial degree in ``(x, y)`` if polynomial, else None.
    """

    k11: Callable
    k12: Callable
    k22: Callable
    name: str = "custom"
    constant: bool = False
    poly_degree: int | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def constant_tensor(cls, k11, k12, k22, name="constant"):
        return cls(_constant(k11), _constant(k12), _constant(k22), name, True, 0,
                   {"k11": float(k11), "k12": float(k12), "k22": float(k22)})

    def constant_values(self):
        """``(k11, k12, k22)`` for a constant tensor."""
        if not self.constant:
            raise ValueError("tensor is not constant")
        z = np.zeros(1)
        return tuple(float(k(z, z)[0]) for k in (self.k11, self.k12, self.k22))

    def evaluate(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        shape = np.broadcast(x, y).shape
        return tuple(np.broadcast_to(k(x, y), shape) for k in (self.k11, self.k12, self.k22))


def sample_grid(n_r: int = 41, n_phi: int = 64):
    """Polar sample points covering the center and the boundary circle."""
    r = np.linspace(0.0, 1.0, n_r)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    return rr * np.cos(pp), rr * np.sin(pp)


def spd_check(K: DiffusivitySpec, alpha: float, grid=None):
    """Sampled spectral bounds of ``K`` and the well-posedness flag.

    Returns:
        ``(lambda_min, lambda_max, wellposed)`` where wellposed means
        ``lambda_max / lambda_min < sqrt(alpha (2 + alpha)) / (2 - alpha)``.

    Raises:
        NotSPDError: if the smallest sampled eigenvalue is not positive.
    """
    x, y = sample_grid() if grid is None else grid
    k11, k12, k22 = K.evaluate(x, y)
    mean = 0.5 * (k11 + k22)
    rad = np.sqrt((0.5 * (k11 - k22)) ** 2 + k12**2)
    lam_m = float(np.min(mean - rad))
    lam_M = float(np.max(mean + rad))
    if not lam_m > 0.0:
        raise NotSPDError(f"diffusivity {K.name!r} is not positive definite (min eigenvalue {lam_m:.3g})")
    return lam_m, lam_M, bool(lam_M / lam_m < wellposed_ratio(alpha))


def wellposed_ratio(alpha: float) -> float:
    """Largest admissible ``lambda_max / lambda_min``, ``sqrt(alpha (2 + alpha)) / (2 - alpha)``."""
    return float(np.sqrt(alpha * (2.0 + alpha)) / (2.0 - alpha))


def winf_norm_estimate(k: Callable, grid=None) -> float:
    """Sampled sup norm of a scalar field on the closed disk."""
    x, y = sample_grid() if grid is None else grid
    return float(np.max(np.abs(k(x, y))))


def weighted_gram_K(
    trial: tuple, test: tuple, K: DiffusivitySpec, gamma: float, L: int, N: int, extra: int = 0
) -> np.ndarray:
    """``integral (1-r^2)^gamma (K T_i) . S_j`` for vector fields given by coefficients.

    Args:
        trial: ``(Tx, Ty)``, each of shape ``(n_trial, 2 (L+1) (N+1))`` (dense or sparse),
            rows being flattened coefficient grids in the ``gamma`` basis.
        test: ``(Sx, Sy)`` of shape ``(n_test, 2 (L+1) (N+1))``.
        K: Diffusivity tensor.
        gamma: Jacobi parameter of the basis and the weight exponent.
        L, N: Truncation of the coefficient grids.
        extra: Additional quadrature nodes per direction (for non-polynomial ``K``).

    Returns:
        Dense matrix of shape ``(n_trial, n_test)``.
    """
    rule = DiskRule.for_truncation(gamma, L, N, extra + (K.poly_degree or 0))
    r, phi, x, y, w = rule.grid()
    psi = basis_table(gamma, L, N, r, phi).reshape(2 * (L + 1) * (N + 1), -1)
    k11, k12, k22 = (np.asarray(v).reshape(-1) for v in K.evaluate(x, y))
    w = w.reshape(-1)
    tx, ty = trial
    sx, sy = test
    fx = tx @ psi
    fy = ty @ psi
    gx = (fx * k11 + fy * k12) * w
    gy = (fx * k12 + fy * k22) * w
    return np.asarray(gx @ (sx @ psi).T + gy @ (sy @ psi).T)
