"""Closed-form operators acting on coefficient vectors.

Every differential or Riesz-type map here is a fixed sparse stencil on the
``(2, L + 1, N + 1)`` coefficient grid. The stencils are built once as
``scipy.sparse`` matrices acting on the flattened grid, so the same code
serves single vectors (:class:`CoeffVec`) and batches of raw arrays.

A derivative that lowers the harmonic degree from 1 to 0 lands on the
constant harmonic ``H_{0,+1} = 1/2``; e.g. ``d/dx`` of ``x = H_{1,+1}`` is
``1 = 2 H_{0,+1}``. Those transitions therefore carry an extra factor 2
relative to the generic rule for ``l >= 2``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import sparse

from .disk_basis import BasisIndex, CoeffVec, VecCoeffField, index_grids, valid_mask
from .errors import DomainError, PreconditionError, RepresentationError
from .specfun import log_gamma_ratio


def _check_alpha(alpha):
    if not 0.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")


def frac_laplacian_eigenvalue(l, n, alpha: float):
    """Eigenvalue of the weighted fractional Laplacian on ``(1-r^2)^{alpha/2} phi_{l,n,mu}``.

    ``lambda = 2^alpha Gamma(n+1+alpha/2) Gamma(n+l+1+alpha/2) / (Gamma(n+1) Gamma(n+l+1))``.
    """
    _check_alpha(alpha)
    l = np.asarray(l, float)
    n = np.asarray(n, float)
    if np.any(l < 0) or np.any(n < 0):
        raise DomainError("eigenvalue needs l, n >= 0")
    h = alpha / 2.0
    out = np.exp(alpha * np.log(2.0) + log_gamma_ratio([n + 1 + h, n + l + 1 + h], [n + 1, n + l + 1]))
    return float(out) if out.ndim == 0 else out


def riesz_scalar(idx: BasisIndex, alpha: float, s: int):
    """Image of ``(1-r^2)^{alpha/2-s} phi_{l,n,mu}^{alpha/2-s}`` under the scalar Riesz operator.

    The image is a multiple of ``phi_{l, n+1-s, mu}^{alpha/2-2+s}``.

    Args:
        idx: Source index.
        alpha: Fractional order in (0, 2).
        s: Integer weight shift with ``alpha/2 - s > -1``.

    Returns:
        ``(target_index, factor)``; the factor is 0 when the target degree is negative.
    """
    _check_alpha(alpha)
    idx = BasisIndex(*idx).validate()
    h = alpha / 2.0
    if not h - s > -1.0:
        raise DomainError(f"weight exponent alpha/2 - s = {h - s} must exceed -1")
    l, n, mu = idx
    target = BasisIndex(l, n + 1 - s, mu)
    if target.n < 0:
        return target, 0.0
    log_f = (alpha - 2.0) * np.log(2.0) + log_gamma_ratio([n + 1 - s + h, n + l + h], [n + 1, n + l + 2 - s])
    return target, float((-1.0) ** (1 - s) * np.exp(log_f))


def riesz_diagonal_factors(L: int, N: int, alpha: float) -> np.ndarray:
    """Per-mode factor of the Riesz map ``(1-r^2)^{alpha/2-1} P^{(alpha/2-1,l)} -> P^{(alpha/2-1,l)}``."""
    _check_alpha(alpha)
    l, n, _ = index_grids(L, N)
    h = alpha / 2.0
    out = np.exp((alpha - 2.0) * np.log(2.0) + log_gamma_ratio([n + h, n + l + h], [n + 1.0, n + l + 1.0]))
    return out * valid_mask(L, N)


def test_map_factors(L: int, N: int, alpha: float, s_weight: float = 0.0) -> np.ndarray:
    """Diagonal factor of the test-function map ``u -> v``.

    Chosen so that the Riesz gradient of ``v`` reproduces the gradient of ``u``
    on every term that lowers the harmonic degree.
    """
    _check_alpha(alpha)
    l, n, _ = index_grids(L, N)
    h = alpha / 2.0
    out = (2.0 - alpha) * np.log(2.0) + np.log(n + 1.0) + log_gamma_ratio([n + 1.0, n + l + 1.0], [n + 1 + h, n + l + h])
    return np.exp(out) * ((n + 1.0) * (n + l + 1.0)) ** s_weight * valid_mask(L, N)


def _flat(slot, l, n, L, N):
    return (slot * (L + 1) + l) * (N + 1) + n


def _stencil(L, N, Lout, Nout, terms):
    """Assemble a sparse map from the ``(L, N)`` grid to the ``(Lout, Nout)`` grid.

    ``terms`` holds ``(flip_mu, dl, dn, coef)`` with ``coef`` a grid-shaped array
    of the coefficient contributed by each source slot.
    """
    l, n, _ = index_grids(L, N)
    slot = np.broadcast_to(np.array([0, 1])[:, None, None], l.shape)
    src_ok = valid_mask(L, N)
    rows, cols, vals = [], [], []
    src_flat = _flat(slot, l, n, L, N)
    for flip, dl, dn, coef in terms:
        ts = 1 - slot if flip else slot
        tl, tn = l + dl, n + dn
        ok = src_ok & (tl >= 0) & (tn >= 0) & (tl <= Lout) & (tn <= Nout) & ~((tl == 0) & (ts == 1))
        ok &= coef != 0.0
        rows.append(_flat(ts, tl, tn, Lout, Nout)[ok])
        cols.append(src_flat[ok])
        vals.append(np.broadcast_to(coef, l.shape)[ok])
    shape = (2 * (Lout + 1) * (Nout + 1), 2 * (L + 1) * (N + 1))
    mat = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape)
    return mat.tocsr()


def _constant_harmonic_factor(l_target):
    return np.where(l_target == 0, 2.0, 1.0)


@lru_cache(maxsize=64)
def grad_weighted_matrices(L: int, N: int, gamma: float):
    """Sparse ``(d/dx, d/dy)`` maps for ``(1-r^2)^gamma P^{(gamma,l)}`` sources.

    Targets use ``P^{(gamma-1,l)}`` with prefactor ``(1-r^2)^{gamma-1}`` on the
    ``(L + 1, N + 1)`` grid.
    """
    l, n, mu = index_grids(L, N)
    raise_c = -(n + gamma)
    lower_c = -(n + 1.0) * _constant_harmonic_factor(l - 1)
    dx = _stencil(L, N, L + 1, N + 1, [(False, 1, 0, raise_c), (False, -1, 1, lower_c)])
    dy = _stencil(L, N, L + 1, N + 1, [(True, 1, 0, mu * raise_c), (True, -1, 1, -mu * lower_c)])
    return dx, dy


@lru_cache(maxsize=64)
def riesz_grad_matrices(L: int, N: int, alpha: float):
    """Sparse maps for the Riesz gradient of ``(1-r^2)^{alpha/2} P^{(alpha/2,l)}`` sources.

    Targets use ``P^{(alpha/2-1,l)}`` without prefactor on the ``(L + 1, N + 1)`` grid.
    """
    _check_alpha(alpha)
    l, n, mu = index_grids(L, N)
    h = alpha / 2.0
    c2 = -np.exp((alpha - 2.0) * np.log(2.0) + log_gamma_ratio([n + 1 + h, n + h + l], [n + 1.0, n + 2.0 + l]))
    raise_c = c2 * (n + h + l)
    lower_c = c2 * (n + l + 1.0) * _constant_harmonic_factor(l - 1)
    dx = _stencil(L, N, L + 1, N + 1, [(False, 1, 0, raise_c), (False, -1, 1, lower_c)])
    dy = _stencil(L, N, L + 1, N + 1, [(True, 1, 0, mu * raise_c), (True, -1, 1, -mu * lower_c)])
    return dx, dy


@lru_cache(maxsize=64)
def grad_unweighted_matrices(L: int, N: int, gamma: float):
    """Sparse gradient maps for plain polynomials in ``P^{(gamma,l)}``.

    Targets use ``P^{(gamma+1,l)}`` on the ``(L + 1, N)`` grid.
    """
    l, n, mu = index_grids(L, N)
    lower_c = (n + l) * _constant_harmonic_factor(l - 1)
    raise_c = n + gamma + l + 1.0
    dx = _stencil(L, N, L + 1, N, [(False, -1, 0, lower_c), (False, 1, -1, raise_c)])
    dy = _stencil(L, N, L + 1, N, [(True, -1, 0, -mu * lower_c), (True, 1, -1, mu * raise_c)])
    return dx, dy


def _apply(mats, coeffs, Lout, Nout):
    dx, dy = mats
    flat = coeffs.reshape(-1)
    shape = (2, Lout + 1, Nout + 1)
    return (dx @ flat).reshape(shape), (dy @ flat).reshape(shape)


def grad_weighted(u: CoeffVec) -> VecCoeffField:
    """Gradient of ``(1-r^2)^gamma sum a phi^{gamma}``.

    Raises:
        RepresentationError: unless the prefactor equals the Jacobi parameter.
        PreconditionError: if ``gamma <= 0`` (the image basis would be undefined).
    """
    g = u.gamma
    if u.prefactor != g:
        raise RepresentationError(f"weighted gradient needs prefactor == gamma, got {u.prefactor} vs {g}")
    if not g > 0.0:
        raise PreconditionError(f"weighted gradient needs gamma > 0, got {g}")
    gx, gy = _apply(grad_weighted_matrices(u.L, u.N, g), u.coeffs, u.L + 1, u.N + 1)
    return VecCoeffField(CoeffVec(g - 1.0, g - 1.0, gx), CoeffVec(g - 1.0, g - 1.0, gy))


def riesz_grad(v: CoeffVec, alpha: float) -> VecCoeffField:
    """Riesz-potential gradient of ``(1-r^2)^{alpha/2} sum b phi^{alpha/2}``.

    The image has no prefactor and uses the ``alpha/2 - 1`` basis.
    """
    _check_alpha(alpha)
    h = alpha / 2.0
    if v.gamma != h or v.prefactor != h:
        raise RepresentationError(f"Riesz gradient needs gamma == prefactor == alpha/2 = {h}")
    gx, gy = _apply(riesz_grad_matrices(v.L, v.N, float(alpha)), v.coeffs, v.L + 1, v.N + 1)
    return VecCoeffField(CoeffVec(h - 1.0, 0.0, gx), CoeffVec(h - 1.0, 0.0, gy))


def grad_unweighted(p: CoeffVec) -> VecCoeffField:
    """Gradient of a plain polynomial ``sum a phi^{gamma}`` (no prefactor)."""
    if p.prefactor != 0.0:
        raise RepresentationError("unweighted gradient needs a vector without prefactor")
    g = p.gamma
    gx, gy = _apply(grad_unweighted_matrices(p.L, p.N, g), p.coeffs, p.L + 1, p.N)
    return VecCoeffField(CoeffVec(g + 1.0, 0.0, gx), CoeffVec(g + 1.0, 0.0, gy))


def riesz_apply(f, alpha: float):
    """Scalar Riesz operator on ``(1-r^2)^{alpha/2-1} sum c phi^{alpha/2-1}`` (diagonal).

    Vector fields are mapped componentwise.
    """
    if isinstance(f, VecCoeffField):
        return VecCoeffField(riesz_apply(f.x, alpha), riesz_apply(f.y, alpha))
    _check_alpha(alpha)
    h = alpha / 2.0
    if f.gamma != h - 1.0 or f.prefactor != h - 1.0:
        raise RepresentationError(f"Riesz operator needs gamma == prefactor == alpha/2 - 1 = {h - 1.0}")
    return CoeffVec(h - 1.0, 0.0, f.coeffs * riesz_diagonal_factors(f.L, f.N, alpha))


def test_map(u: CoeffVec, alpha: float, s_weight: float = 0.0) -> CoeffVec:
    """Test function paired with trial ``u`` (diagonal in the coefficients)."""
    h = alpha / 2.0
    if u.gamma != h or u.prefactor != h:
        raise RepresentationError(f"test map needs gamma == prefactor == alpha/2 = {h}")
    return CoeffVec(h, h, u.coeffs * test_map_factors(u.L, u.N, alpha, s_weight))


def w_residual(U: VecCoeffField, V: VecCoeffField) -> VecCoeffField:
    """Coefficient difference ``U - V`` of two fields in the same Jacobi family.

    ``U`` typically carries the prefactor ``(1-r^2)^{gamma}`` and ``V`` none;
    the difference is taken on coefficients and returned without prefactor.

    Raises:
        RepresentationError: if the Jacobi parameters differ.
    """
    if U.gamma != V.gamma:
        raise RepresentationError(f"fields use different Jacobi families ({U.gamma} vs {V.gamma})")
    strip = lambda c: CoeffVec(c.gamma, 0.0, c.coeffs)
    return VecCoeffField(strip(U.x), strip(U.y)) - VecCoeffField(strip(V.x), strip(V.y))


def residual_field(u: CoeffVec, alpha: float) -> VecCoeffField:
    """``W = grad u - riesz_grad(test_map(u))`` in the ``alpha/2 - 1`` family."""
    return w_residual(grad_weighted(u), riesz_grad(test_map(u, alpha), alpha))


test_map.__test__ = False
test_map_factors.__test__ = False
