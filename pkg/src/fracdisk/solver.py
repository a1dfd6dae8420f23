"""Assembly and solution of the square Petrov-Galerkin system.

Trial functions are ``(1-r^2)^{alpha/2} phi_i`` and test functions
``(1-r^2)^{alpha/2} phi_j`` (both in the ``alpha/2`` basis). With ``U_i`` the
gradient coefficients of trial ``i`` and ``V_j`` the Riesz-gradient
coefficients of test ``j`` (both in the ``alpha/2 - 1`` basis),

    B_ij = integral (1-r^2)^{alpha/2-1} (K U_i) . V_j.

For constant ``K`` this is a finite sum over shared modes weighted by basis
norms, and ``B`` is sparse. Variable ``K`` goes through quadrature.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as splinalg

from .coeff_ops import grad_weighted_matrices, riesz_grad_matrices
from .disk_basis import CoeffVec, index_grids, norm_sq_grid, sobolev_norm, valid_mask
from .errors import DomainError, PreconditionError, SolveError
from .quadrature import DiffusivitySpec, DiskRule, spd_check, weighted_gram_K, weighted_moments

CLOSED_FORM = "closed_form_constant_K"
QUADRATURE = "quadrature_variable_K"
DENSE_LIMIT = 4000


class WellPosednessWarning(UserWarning):
    """The diffusivity contrast exceeds the admissible ratio for this alpha."""


@dataclass
class SolveConfig:
    """Inputs of one solve.

    Attributes:
        alpha: Fractional order in (1, 2).
        L, N: Truncation (harmonic degree and radial degree).
        K: Diffusivity tensor.
        rhs: Right-hand side, a :class:`CoeffVec` in the ``alpha/2`` basis without
            prefactor, or a callable ``f(x, y)``.
        mode: Assembly route; None picks closed form for constant ``K``.
        tol: Bound on the relative linear-solve residual.
        allow_illposed: Solve even when the contrast condition fails.
        strict: Raise instead of warning when the contrast condition fails.
        quad_extra: Extra quadrature nodes for variable ``K`` or callable ``rhs``.
    """

    alpha: float
    L: int
    N: int
    K: DiffusivitySpec
    rhs: object = None
    mode: str | None = None
    tol: float = 1e-10
    allow_illposed: bool = True
    strict: bool = False
    quad_extra: int = 0
    measure_infsup: bool | None = None

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise DomainError(f"alpha must lie in (1, 2), got {self.alpha}")
        if self.L < 0 or self.N < 0:
            raise DomainError("truncation must be non-negative")
        if self.mode is None:
            self.mode = CLOSED_FORM if self.K.constant else QUADRATURE
        if self.mode not in (CLOSED_FORM, QUADRATURE):
            raise ValueError(f"unknown assembly mode {self.mode!r}")
        if self.mode == CLOSED_FORM and not self.K.constant:
            raise PreconditionError("closed-form assembly needs a constant diffusivity")


@dataclass
class SolveReport:
    solution: CoeffVec
    residual: float
    infsup: float | None
    c2_theory: float
    lambda_min: float
    lambda_max: float
    wellposed: bool
    apriori: dict
    s_est: float | None
    wall_time: float
    mode: str
    dimension: int
    extra: dict = field(default_factory=dict)


def c2_theoretical(alpha: float, lam_min: float, lam_max: float) -> float:
    """Inf-sup lower bound ``((9 alpha + 2)/8)(lambda_min - (2-alpha)/sqrt(alpha(2+alpha)) lambda_max)``."""
    return (9.0 * alpha + 2.0) / 8.0 * (lam_min - (2.0 - alpha) / np.sqrt(alpha * (2.0 + alpha)) * lam_max)


def trial_positions(L: int, N: int) -> np.ndarray:
    """Flat grid positions of the basis members, which index rows and columns of ``B``."""
    return np.flatnonzero(valid_mask(L, N).reshape(-1))


def _restricted(mats, L, N):
    pos = trial_positions(L, N)
    return tuple(m[:, pos].T.tocsr() for m in mats)


def mode_norms(alpha: float, L: int, N: int):
    """Trial (``H^1``) and test (``H^{alpha-1}``) norms of each basis member, in row order."""
    pos = trial_positions(L, N)
    nsq = norm_sq_grid(alpha / 2.0, L, N).reshape(-1)[pos]
    l, n, _ = index_grids(L, N)
    w = ((n + 1.0) * (n + l + 1.0)).reshape(-1)[pos]
    return np.sqrt(w * nsq), np.sqrt(w ** (alpha - 1.0) * nsq)


def _gram(alpha, L, N, K, mode, quad_extra, trial_rows=None):
    h = alpha / 2.0
    U = _restricted(grad_weighted_matrices(L, N, h), L, N)
    V = _restricted(riesz_grad_matrices(L, N, float(alpha)), L, N)
    if trial_rows is not None:
        U = tuple(sparse.csr_matrix(trial_rows @ u) for u in U)
    if mode == CLOSED_FORM:
        k11, k12, k22 = K.constant_values()
        D = sparse.diags(norm_sq_grid(h - 1.0, L + 1, N + 1).reshape(-1))
        Ux, Uy = U
        Vx, Vy = V
        B = (k11 * Ux + k12 * Uy) @ D @ Vx.T + (k12 * Ux + k22 * Uy) @ D @ Vy.T
        return sparse.csr_matrix(B)
    return weighted_gram_K(U, V, K, h - 1.0, L + 1, N + 1, extra=quad_extra)


def load_vector(alpha: float, L: int, N: int, rhs, quad_extra: int = 0) -> np.ndarray:
    """``F_j = (f, phi_j)`` in ``L^2`` with weight ``(1-r^2)^{alpha/2}``, in row order."""
    h = alpha / 2.0
    pos = trial_positions(L, N)
    if isinstance(rhs, CoeffVec):
        if rhs.gamma != h or rhs.prefactor != 0.0:
            raise PreconditionError(f"right-hand side must use the alpha/2 = {h} basis without prefactor")
        coeffs = rhs.with_truncation(L, N).coeffs
        return (coeffs * norm_sq_grid(h, L, N)).reshape(-1)[pos]
    if callable(rhs):
        rule = DiskRule.for_truncation(h, L, N, 16 + quad_extra)
        _, _, x, y, _ = rule.grid()
        vals = np.asarray(rhs(x, y), dtype=float) * np.ones_like(x)
        return weighted_moments(rule, vals, h, L, N).reshape(-1)[pos]
    raise PreconditionError("right-hand side must be a CoeffVec or a callable f(x, y)")


def assemble(cfg: SolveConfig):
    """Square system ``(B, F)`` for the truncation in ``cfg``.

    ``B`` is sparse for the closed-form route and dense for quadrature.
    """
    B = _gram(cfg.alpha, cfg.L, cfg.N, cfg.K, cfg.mode, cfg.quad_extra)
    F = load_vector(cfg.alpha, cfg.L, cfg.N, cfg.rhs, cfg.quad_extra)
    return B, F


def normalized_matrix(B, alpha: float, L: int, N: int) -> np.ndarray:
    """``B`` with rows scaled by trial norms and columns by test norms (dense)."""
    trial, test = mode_norms(alpha, L, N)
    dense = B.toarray() if sparse.issparse(B) else np.asarray(B)
    return dense / trial[:, None] / test[None, :]


def discrete_infsup(B, alpha: float, L: int, N: int) -> float:
    """Smallest singular value of the normalized system matrix."""
    return float(linalg.svdvals(normalized_matrix(B, alpha, L, N))[-1])


def _solve_linear(B, F, tol):
    """Solve ``a^T B = F^T`` (rows of ``B`` are trial functions)."""
    A = B.T
    if sparse.issparse(A):
        a = splinalg.spsolve(A.tocsc(), F)
    elif A.shape[0] <= DENSE_LIMIT:
        try:
            a = linalg.lu_solve(linalg.lu_factor(A, check_finite=True), F)
        except (linalg.LinAlgError, ValueError) as exc:
            raise SolveError(f"dense factorization failed: {exc}", np.linalg.cond(A)) from exc
    else:
        a, info = splinalg.gmres(A, F, rtol=tol, restart=200, maxiter=50)
        if info != 0:
            raise SolveError(f"GMRES did not converge (info={info})")
    return np.asarray(a, dtype=float)


def solve(cfg: SolveConfig) -> SolveReport:
    """Assemble, solve and report.

    Raises:
        NotSPDError: if ``K`` is not positive definite on the sample grid.
        PreconditionError: if the contrast condition fails and ``strict`` is set.
        SolveError: if the system is singular or the residual exceeds ``cfg.tol``.
    """
    start = time.perf_counter()
    lam_m, lam_M, wellposed = spd_check(cfg.K, cfg.alpha)
    if not wellposed:
        msg = (f"lambda_max/lambda_min = {lam_M / lam_m:.4g} exceeds the admissible ratio for "
               f"alpha = {cfg.alpha}; the inf-sup estimate gives no guarantee")
        if cfg.strict or not cfg.allow_illposed:
            raise PreconditionError(msg)
        warnings.warn(msg, WellPosednessWarning, stacklevel=2)
    B, F = assemble(cfg)
    if not np.all(np.isfinite(F)) or not np.all(np.isfinite(B.data if sparse.issparse(B) else B)):
        raise SolveError("assembled system contains non-finite entries")
    h = cfg.alpha / 2.0
    if not np.any(F):
        a = np.zeros_like(F)
    else:
        a = _solve_linear(B, F, cfg.tol)
    resid_vec = B.T @ a - F
    fnorm = np.linalg.norm(F)
    residual = float(np.linalg.norm(resid_vec) / fnorm) if fnorm > 0 else float(np.linalg.norm(resid_vec))
    if not np.isfinite(residual) or residual > cfg.tol:
        dense = B.toarray() if sparse.issparse(B) else B
        raise SolveError(f"relative residual {residual:.3g} exceeds tolerance {cfg.tol:.3g}", float(np.linalg.cond(dense)))
    grid = np.zeros(2 * (cfg.L + 1) * (cfg.N + 1))
    grid[trial_positions(cfg.L, cfg.N)] = a
    u = CoeffVec(h, h, grid.reshape(2, cfg.L + 1, cfg.N + 1))

    measure = cfg.measure_infsup if cfg.measure_infsup is not None else len(F) <= 1500
    infsup = discrete_infsup(B, cfg.alpha, cfg.L, cfg.N) if measure else None
    c2 = c2_theoretical(cfg.alpha, lam_m, lam_M)
    _, test_norm = mode_norms(cfg.alpha, cfg.L, cfg.N)
    f_dual = float(np.linalg.norm(F / test_norm))
    u_h1 = sobolev_norm(u, 1.0)
    apriori = {"u_norm_H1": u_h1, "f_norm_dual": f_dual, "exact_lambda": bool(cfg.K.constant)}
    if wellposed and c2 > 0:
        apriori["bound"] = f_dual / c2
        apriori["holds"] = bool(u_h1 <= f_dual / c2 * (1.0 + 1e-12))
    try:
        s_est = regularity_report(u)
    except PreconditionError:
        s_est = None
    return SolveReport(
        solution=u,
        residual=residual,
        infsup=infsup,
        c2_theory=float(c2),
        lambda_min=lam_m,
        lambda_max=lam_M,
        wellposed=wellposed,
        apriori=apriori,
        s_est=s_est,
        wall_time=time.perf_counter() - start,
        mode=cfg.mode,
        dimension=len(F),
    )


def apply_operator(u: CoeffVec, alpha: float, K: DiffusivitySpec, halo: int = 2, mode: str | None = None,
                   quad_extra: int = 0) -> CoeffVec:
    """Galerkin image of ``u`` on the truncation enlarged by ``halo`` in both directions.

    Returns the coefficients ``c_j`` of ``f`` in the ``alpha/2`` basis with
    ``c_j ||phi_j||^2 = B(u, (1-r^2)^{alpha/2} phi_j)``.
    """
    h = alpha / 2.0
    if u.gamma != h or u.prefactor != h:
        raise PreconditionError(f"u must use the alpha/2 = {h} basis with matching prefactor")
    if mode is None:
        mode = CLOSED_FORM if K.constant else QUADRATURE
    L, N = u.L + halo, u.N + halo
    big = u.with_truncation(L, N)
    pos = trial_positions(L, N)
    row = sparse.csr_matrix(big.coeffs.reshape(-1)[pos][None, :])
    Brow = _gram(alpha, L, N, K, mode, quad_extra, trial_rows=row)
    Brow = np.asarray(Brow.toarray() if sparse.issparse(Brow) else Brow).reshape(-1)
    nsq = norm_sq_grid(h, L, N).reshape(-1)[pos]
    grid = np.zeros(2 * (L + 1) * (N + 1))
    grid[pos] = Brow / nsq
    return CoeffVec(h, 0.0, grid.reshape(2, L + 1, N + 1))


def evaluate_solution(u: CoeffVec, r, phi) -> np.ndarray:
    """Solution values at polar points; exactly zero on the unit circle.

    Raises:
        DomainError: for points with ``r > 1``.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r > 1.0) or np.any(r < 0.0):
        raise DomainError("evaluation radius must lie in [0, 1]")
    vals = u.evaluate(r * np.cos(phi), r * np.sin(phi))
    if u.prefactor > 0.0:
        vals = np.where(r == 1.0, 0.0, vals)
    return vals


S_GRID = np.arange(0.0, 6.0 + 1e-9, 0.25)


def shell_energies(u: CoeffVec, s: float) -> np.ndarray:
    """Energies of ``u`` in the ``H^{1+s}`` norm grouped by shell ``m = n + l``."""
    l, n, _ = index_grids(u.L, u.N)
    terms = ((n + 1.0) * (n + l + 1.0)) ** (1.0 + s) * u.coeffs**2 * u.norm_sq_grid()
    return np.bincount((n + l).reshape(-1), weights=terms.reshape(-1), minlength=u.L + u.N + 1)


def regularity_report(u: CoeffVec, s_grid=S_GRID, floor: float = 1e-24) -> float:
    """Largest ``s`` on ``s_grid`` for which the ``H^{1+s}`` shell energies decay summably.

    Shell energies below ``floor`` times the largest are treated as zero. A
    vanishing tail (finite expansion) returns ``max(s_grid)``. Otherwise the
    least-squares slope of log energy against log shell index over the upper
    half of the complete shells must be below -1.

    Raises:
        PreconditionError: with fewer than three populated shells and a nonzero tail.
    """
    base = shell_energies(u, 0.0)
    if not np.any(base > 0):
        raise PreconditionError("regularity needs a nonzero coefficient vector")
    live = base > floor * base.max()
    top = int(np.max(np.nonzero(live)))
    complete = min(u.L, u.N)
    if top < complete:
        return float(np.max(s_grid))
    m = np.arange(complete + 1)
    sel = (m >= max(1, complete // 2)) & live[: complete + 1]
    if np.count_nonzero(sel) < 3:
        raise PreconditionError("regularity needs at least three populated shells in the tail")
    best = 0.0
    for s in s_grid:
        e = shell_energies(u, s)[: complete + 1]
        slope = np.polyfit(np.log(m[sel] + 1.0), np.log(e[sel]), 1)[0]
        if slope < -1.0:
            best = float(s)
        else:
            break
    return best
