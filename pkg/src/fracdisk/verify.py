"""Numerical verification of the analytic constants and operator identities.

Each check returns a :class:`CheckResult` holding the measured extremum, the
analytic bound it is compared with, and the pass flag. Checks are
deterministic given their arguments (random samples come from a seeded
``numpy`` generator).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import coeff_ops
from .coeff_ops import (
    frac_laplacian_eigenvalue,
    grad_unweighted_matrices,
    grad_weighted_matrices,
    riesz_apply,
    riesz_diagonal_factors,
    riesz_grad,
    riesz_grad_matrices,
    test_map_factors,
)
from .disk_basis import (
    CoeffVec,
    basis_norm_sq,
    basis_table,
    index_grids,
    norm_ratio_lower,
    norm_ratio_raise,
    norm_ratio_weight_shift,
    norm_sq_grid,
    sobolev_weight,
    valid_mask,
)
from .errors import DomainError
from .quadrature import DiffusivitySpec, DiskRule, spd_check, wellposed_ratio
from .solver import (
    CLOSED_FORM,
    QUADRATURE,
    SolveConfig,
    _gram,
    apply_operator,
    c2_theoretical,
    discrete_infsup,
    mode_norms,
    normalized_matrix,
    solve,
    trial_positions,
)

THREADS_ENV = "FRACDISK_THREADS"


@dataclass
class CheckResult:
    """Outcome of one verification check.

    ``relation`` says how ``measured`` compares with ``bound``: ``"<="`` and
    ``">="`` are inequalities, ``"=="`` means agreement within ``tolerance``.
    ``passed`` is None for exploratory checks, which carry no verdict.
    """

    name: str
    alpha: float
    measured: float
    bound: float
    relation: str
    passed: bool | None
    tolerance: float = 0.0
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        if self.relation == "<=":
            return self.bound - self.measured
        if self.relation == ">=":
            return self.measured - self.bound
        return self.tolerance - abs(self.measured - self.bound)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["margin"] = self.margin
        return _plain(out)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _check_alpha(alpha):
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")


def w_bound_constant(alpha: float) -> float:
    """``(2 - alpha) / sqrt(alpha (2 + alpha))``."""
    return float((2.0 - alpha) / np.sqrt(alpha * (2.0 + alpha)))


def norm_lower_constant(alpha: float) -> float:
    """``(9 alpha + 2) / 8``."""
    return (9.0 * alpha + 2.0) / 8.0


# Ratio expressions comparing gradient energy with the H^1 norm per source mode.

def ratio_l0(n, alpha):
    return 4.0 * (n + alpha / 2.0) * (n + 1.0) / ((n + 1.0) * (n + 1.0))


def ratio_l1(n, alpha):
    h = alpha / 2.0
    return (0.5 * (n + 1.0) * (n + h + 1.0) + 2.0 * (n + h) * (n + 2.0)) / ((n + 1.0) * (n + 2.0))


def ratio_lge2(l, n, alpha):
    h = alpha / 2.0
    return 2.0 * ((n + h) * (n + l + 1.0) + (n + 1.0) * (n + l + h)) / ((n + 1.0) * (n + l + 1.0))


def f1(n, alpha):
    """Squared W/U coefficient ratio for ``l = 1`` sources in closed form."""
    h = alpha / 2.0
    x = (n + 1.0) * (n + h + 1.0) / ((n + 2.0) * (n + h))
    return (x - 1.0) ** 2 / (0.25 * x + 1.0)


def f3(l, n, alpha):
    """Squared W/U coefficient ratio for ``l >= 2`` sources in closed form."""
    h = alpha / 2.0
    x = (n + 1.0) * (n + l + h) / ((n + l + 1.0) * (n + h))
    return (x - 1.0) ** 2 / (x + 1.0)


def check_ratio_bounds(alpha: float, n_max: int = 10**6, l_max: int = 2000) -> CheckResult:
    """Exhaustive sweep of the three per-mode ratio expressions against their brackets."""
    _check_alpha(alpha)
    n = np.arange(n_max + 1, dtype=float)
    r1 = ratio_l0(n, alpha)
    r2 = ratio_l1(n, alpha)
    ls = np.arange(2, l_max + 1, dtype=float)[:, None]
    ns = np.unique(np.concatenate([np.arange(200), np.geomspace(200, n_max, 200).astype(int)])).astype(float)[None, :]
    r3 = ratio_lge2(ls, ns, alpha)
    lo1, lo2, lo3 = 2.0 * alpha, norm_lower_constant(alpha), (4.0 * alpha + 4.0) / 3.0
    tol = 1e-12
    ok = {
        "r0_lower": bool(r1.min() >= lo1 * (1 - tol)),
        "r0_upper_strict": bool(r1.max() < 4.0),
        "r1_lower": bool(r2.min() >= lo2 * (1 - tol)),
        "r1_upper_strict": bool(r2.max() < 2.5),
        "r2_lower": bool(r3.min() >= lo3 * (1 - tol)),
        "r2_upper_strict": bool(r3.max() < 4.0),
        "r0_attained_n0": bool(abs(r1[0] - lo1) <= tol * lo1),
        "r1_attained_n0": bool(abs(r2[0] - lo2) <= tol * lo2),
        "r2_attained_l2_n0": bool(abs(r3[0, 0] - lo3) <= tol * lo3),
    }
    worst = min(r1.min() - lo1, r2.min() - lo2, r3.min() - lo3, 4.0 - r1.max(), 2.5 - r2.max(), 4.0 - r3.max())
    return CheckResult(
        "ratio_bounds", alpha, float(worst), 0.0, ">=", all(ok.values()), tol,
        {"n_max": n_max, "l_max": l_max},
        {"subchecks": ok, "r0_min": r1.min(), "r0_max": r1.max(), "r1_min": r2.min(), "r1_max": r2.max(),
         "r2_min": r3.min(), "r2_max": r3.max()},
    )


def check_sup_formulas(alpha: float, n_max: int = 10**6, l_max: int = 10**4) -> CheckResult:
    """Maximum of ``f1`` over ``n`` and supremum of ``f3`` along ``n = 0``."""
    _check_alpha(alpha)
    n = np.arange(n_max + 1, dtype=float)
    v1 = f1(n, alpha)
    sup1 = 2.0 * (2.0 - alpha) ** 2 / (alpha * (2.0 + 9.0 * alpha))
    l = np.arange(2, l_max + 1, dtype=float)
    v3 = f3(l, 0.0, alpha)
    sup3 = (2.0 - alpha) ** 2 / (alpha * (2.0 + alpha))
    ok = {
        "f1_argmax_n0": bool(np.argmax(v1) == 0),
        "f1_max_equals_closed_form": bool(abs(v1[0] - sup1) <= 1e-12 * sup1),
        "f3_monotone_in_l": bool(np.all(np.diff(v3) > 0)),
        "f3_below_sup": bool(np.all(v3 < sup3)),
        "f3_within_1e-3": bool(sup3 - v3[-1] <= 1e-3),
        "f1_below_f3_sup": bool(sup1 <= sup3),
    }
    return CheckResult(
        "sup_formulas", alpha, float(v1.max()), float(sup1), "==", all(ok.values()), 1e-12 * sup1,
        {"n_max": n_max, "l_max": l_max},
        {"subchecks": ok, "f3_at_l_max": v3[-1], "f3_sup": sup3},
    )


def random_batch(rng, count: int, L: int, N: int, alpha: float) -> np.ndarray:
    """Random coefficient grids of mixed character, shape ``(count, 2, L + 1, N + 1)``.

    Draws alternate between flat spectra in the ``H^1`` norm, algebraic decay
    with a random exponent, random sparse supports and low-degree clusters, so
    that both smooth and rough vectors are covered.
    """
    l, n, _ = index_grids(L, N)
    scale = 1.0 / np.sqrt(sobolev_weight(L, N, 1.0) * np.where(valid_mask(L, N), norm_sq_grid(alpha / 2.0, L, N), 1.0))
    out = rng.standard_normal((count, 2, L + 1, N + 1)) * scale
    kind = np.arange(count) % 4
    decay = rng.uniform(0.0, 3.0, size=count)[:, None, None, None]
    out[kind == 1] *= ((n + 1.0) * (n + l + 1.0))[None] ** (-decay[kind == 1])
    sparse_mask = rng.random((count, 2, L + 1, N + 1)) < 0.05
    out[kind == 2] *= sparse_mask[kind == 2]
    low = (l <= 3) & (n <= 3)
    out[kind == 3] *= low[None]
    out *= valid_mask(L, N)[None]
    empty = ~np.any(out.reshape(count, -1), axis=1)
    out[empty, 0, 0, 0] = 1.0
    return out


def _u_energy(batch, alpha, L, N):
    """Squared ``L^2`` norms of the weighted gradient coefficients, one per row."""
    h = alpha / 2.0
    mx, my = grad_weighted_matrices(L, N, h)
    flat = batch.reshape(len(batch), -1).T
    nsq = norm_sq_grid(h - 1.0, L + 1, N + 1).reshape(-1)[:, None]
    return np.sum(((mx @ flat) ** 2 + (my @ flat) ** 2) * nsq, axis=0)


def _h1_energy(batch, alpha, L, N):
    w = sobolev_weight(L, N, 1.0) * norm_sq_grid(alpha / 2.0, L, N)
    return np.sum(batch**2 * w[None], axis=(1, 2, 3))


def _single(L, N, l, n, mu=1):
    out = np.zeros((1, 2, L + 1, N + 1))
    out[0, 0 if mu == 1 else 1, l, n] = 1.0
    return out


def _single_modes(L, N):
    mask = valid_mask(L, N)
    idx = np.argwhere(mask)
    out = np.zeros((len(idx), 2, L + 1, N + 1))
    out[np.arange(len(idx)), idx[:, 0], idx[:, 1], idx[:, 2]] = 1.0
    return out


def norm_ratios(batch, alpha, L, N):
    """``||U||^2 / ||u||^2_{H^1}`` for each row of a coefficient batch."""
    return _u_energy(batch, alpha, L, N) / _h1_energy(batch, alpha, L, N)


def check_norm_equivalence(alpha: float, L: int = 24, N: int = 24, n_random: int = 1000, seed: int = 0) -> CheckResult:
    """Gradient energy against the ``H^1`` norm on random and single-mode vectors.

    Sub-claims: every ratio lies in ``[(9 alpha + 2)/8, 4]``; the single mode
    ``(1, 0, mu)`` attains the lower end to 1e-12; the mode ``(0, 1000, +1)``
    is within 2% of 4.
    """
    _check_alpha(alpha)
    rng = np.random.default_rng(seed)
    lo = norm_lower_constant(alpha)
    rand = norm_ratios(random_batch(rng, n_random, L, N, alpha), alpha, L, N)
    singles = norm_ratios(_single_modes(L, N), alpha, L, N)
    allr = np.concatenate([rand, singles])
    tol = 1e-12
    mode10 = [float(norm_ratios(_single(1, 0, 1, 0, mu), alpha, 1, 0)[0]) for mu in (1, -1)]
    mode0_high = float(norm_ratios(_single(0, 1000, 0, 1000), alpha, 0, 1000)[0])
    ok = {
        "bracket": bool(allr.min() >= lo * (1 - tol) and allr.max() <= 4.0 * (1 + tol)),
        "lower_attained_at_mode_1_0": bool(all(abs(m - lo) <= tol * lo for m in mode10)),
        "mode_0_1000_near_4": bool(abs(mode0_high - 4.0) <= 0.02 * 4.0),
    }
    return CheckResult(
        "norm_equivalence", alpha, float(allr.min()), lo, ">=", all(ok.values()), tol,
        {"L": L, "N": N, "n_random": n_random, "seed": seed},
        {"subchecks": ok, "min_ratio": allr.min(), "max_ratio": allr.max(),
         "argmin_single_mode": [int(v) for v in np.argwhere(valid_mask(L, N))[np.argmin(singles)]],
         "mode_1_0_ratio": mode10, "mode_0_1000_ratio": mode0_high, "upper": 4.0},
    )


def _w_and_u(batch, alpha, L, N, target_weight_s=None):
    """Squared norms of ``W`` and ``U`` per row, optionally weighted by target indices."""
    h = alpha / 2.0
    gx, gy = grad_weighted_matrices(L, N, h)
    rx, ry = riesz_grad_matrices(L, N, float(alpha))
    flat = batch.reshape(len(batch), -1).T
    tflat = flat * test_map_factors(L, N, alpha).reshape(-1)[:, None]
    ux, uy = gx @ flat, gy @ flat
    wx, wy = ux - rx @ tflat, uy - ry @ tflat
    nsq = norm_sq_grid(h - 1.0, L + 1, N + 1).reshape(-1)[:, None]
    if target_weight_s is not None:
        nsq = nsq * sobolev_weight(L + 1, N + 1, target_weight_s).reshape(-1)[:, None]
    return np.sum((wx**2 + wy**2) * nsq, axis=0), np.sum((ux**2 + uy**2) * nsq, axis=0)


def w_ratios(batch, alpha, L, N, target_weight_s=None):
    w, u = _w_and_u(batch, alpha, L, N, target_weight_s)
    return np.sqrt(w / u)


def check_w_bound(alpha: float, L: int = 24, N: int = 24, n_random: int = 1000, seed: int = 0,
                  s_weight: float = 0.0) -> CheckResult:
    """``||W|| / ||U||`` against ``(2 - alpha)/sqrt(alpha (2 + alpha))``.

    With ``s_weight != 0`` the coefficients are premultiplied by
    ``((n+1)(n+l+1))^{s/2}`` before forming ``U`` and ``W``. The ratio with the
    weights placed on the output modes instead is reported in ``details``.
    """
    _check_alpha(alpha)
    rng = np.random.default_rng(seed)
    bound = w_bound_constant(alpha)
    pre = sobolev_weight(L, N, s_weight / 2.0)[None]
    batch = np.concatenate([random_batch(rng, n_random, L, N, alpha), _single_modes(L, N)]) * pre
    ratios = w_ratios(batch, alpha, L, N)
    adversarial = {}
    for l in (2, 10, 50, 200):
        adversarial[l] = float(w_ratios(_single(l, 0, l, 0), alpha, l, 0)[0])
    low_support = np.zeros((1, 2, 1, N + 1))
    low_support[0, 0, 0, :] = rng.standard_normal(N + 1)
    wl, ul = _w_and_u(low_support, alpha, 0, N)
    measured = max(ratios.max(), max(adversarial.values()))
    tol = 1e-12
    ok = {
        "all_below_bound": bool(measured <= bound * (1 + tol)),
        "mode_200_0_within_5pct": bool(bound * 0.95 <= adversarial[200] <= bound),
        "l0_support_gives_zero_W": bool(np.sqrt(wl[0] / ul[0]) <= 1e-13),
    }
    details = {"subchecks": ok, "adversarial_l_n0": adversarial, "random_max": ratios.max()}
    if s_weight != 0.0:
        raw = np.concatenate([random_batch(np.random.default_rng(seed), n_random, L, N, alpha), _single_modes(L, N)])
        details["output_weighted_max"] = float(w_ratios(raw, alpha, L, N, target_weight_s=s_weight).max())
    return CheckResult(
        f"w_bound[s={s_weight:g}]", alpha, float(measured), bound, "<=", all(ok.values()), tol,
        {"L": L, "N": N, "n_random": n_random, "seed": seed, "s_weight": s_weight}, details,
    )


def identity_K() -> DiffusivitySpec:
    return DiffusivitySpec.constant_tensor(1.0, 0.0, 1.0, "identity")


def check_infsup(alpha: float, K: DiffusivitySpec | None = None, L: int = 12, N: int = 12,
                 n_random: int = 200, seed: int = 0) -> CheckResult:
    """Normalized smallest singular value of the system matrix against the analytic floor.

    The ratio ``B(u, T u) / (||u||_{H^1} ||T u||_{H^{alpha-1}})`` along test-map
    directions ``T`` is recorded as a second estimate.
    """
    _check_alpha(alpha)
    K = identity_K() if K is None else K
    lam_m, lam_M, wellposed = spd_check(K, alpha)
    c2 = c2_theoretical(alpha, lam_m, lam_M)
    mode = CLOSED_FORM if K.constant else QUADRATURE
    B = _gram(alpha, L, N, K, mode, 0)
    sigma = discrete_infsup(B, alpha, L, N)
    Bn = normalized_matrix(B, alpha, L, N)
    trial, test = mode_norms(alpha, L, N)
    pos = trial_positions(L, N)
    tfac = test_map_factors(L, N, alpha).reshape(-1)[pos]
    rng = np.random.default_rng(seed)
    coeffs = np.vstack([np.eye(len(pos)), rng.standard_normal((n_random, len(pos))) / trial])
    uhat = coeffs * trial
    vhat = coeffs * tfac * test
    quot = np.einsum("ij,jk,ik->i", uhat, Bn, vhat) / np.linalg.norm(uhat, axis=1) / np.linalg.norm(vhat, axis=1)
    passed = bool(sigma >= c2) if wellposed else None
    return CheckResult(
        f"infsup[N={N}]", alpha, sigma, float(c2), ">=", passed, 0.0,
        {"L": L, "N": N, "K": K.name, "seed": seed},
        {"lambda_min": lam_m, "lambda_max": lam_M, "wellposed": wellposed,
         "test_map_direction_min": float(quot.min())},
    )


def check_eigen_identity(alpha: float, lmax: int = 12, nmax: int = 12, quadrature_max: int = 6) -> CheckResult:
    """Weak form with identity diffusivity equals ``lambda_{l,n} ||phi||^2`` on the diagonal, zero elsewhere.

    The closed-form system is compared over ``l, n <= lmax, nmax``; the
    quadrature route is compared with it on the smaller ``quadrature_max`` block.
    """
    _check_alpha(alpha)
    B = _gram(alpha, lmax, nmax, identity_K(), CLOSED_FORM, 0).toarray()
    pos = trial_positions(lmax, nmax)
    l, n, _ = index_grids(lmax, nmax)
    lam = frac_laplacian_eigenvalue(l.reshape(-1)[pos], n.reshape(-1)[pos], alpha)
    nsq = norm_sq_grid(alpha / 2.0, lmax, nmax).reshape(-1)[pos]
    expected = np.diag(lam * nsq)
    err = np.max(np.abs(B - expected) / np.sqrt(np.outer(np.diag(expected), np.diag(expected))))
    Bq = _gram(alpha, quadrature_max, quadrature_max, identity_K(), QUADRATURE, 0)
    Bc = _gram(alpha, quadrature_max, quadrature_max, identity_K(), CLOSED_FORM, 0).toarray()
    dq = np.sqrt(np.outer(np.diag(Bc), np.diag(Bc)))
    err_q = float(np.max(np.abs(Bq - Bc) / dq))
    tol = 1e-10
    return CheckResult(
        "eigen_identity", alpha, float(max(err, err_q)), 0.0, "==", bool(err <= tol and err_q <= tol), tol,
        {"lmax": lmax, "nmax": nmax, "quadrature_max": quadrature_max},
        {"closed_form_rel_err": float(err), "quadrature_rel_err": err_q},
    )


def check_norm_ratio_identities(alpha: float, lmax: int = 20, nmax: int = 20, shift_max: int = 3,
                              quad_max: int = 10) -> CheckResult:
    """Closed-form norm ratios against direct norms, and norms against quadrature."""
    _check_alpha(alpha)
    gamma = alpha / 2.0
    l, n = np.meshgrid(np.arange(lmax + 1), np.arange(nmax + 1), indexing="ij")
    worst = 0.0
    for mu in (1, -1):
        sel = (l >= 1) | (mu == 1)
        lv, nv = l[sel], n[sel]
        base = basis_norm_sq(lv, nv, np.full_like(lv, mu), gamma)
        for k in range(1, shift_max + 1):
            direct = basis_norm_sq(lv, nv, np.full_like(lv, mu), gamma + k) / base
            worst = max(worst, np.max(np.abs(norm_ratio_weight_shift(lv, nv, gamma, k) / direct - 1)))
        for j in range(shift_max + 1):
            for m in range(shift_max + 1):
                direct = basis_norm_sq(lv + j, nv + m, np.full_like(lv, mu), gamma) / base
                worst = max(worst, np.max(np.abs(norm_ratio_raise(lv, nv, gamma, j, m, mu) / direct - 1)))
                if j > m:
                    continue
                ok = (lv - j >= 0) & ((lv - j >= 1) | (mu == 1))
                if not np.any(ok):
                    continue
                direct = basis_norm_sq(lv[ok] - j, nv[ok] + m, np.full(ok.sum(), mu), gamma) / base[ok]
                worst = max(worst, np.max(np.abs(norm_ratio_lower(lv[ok], nv[ok], gamma, j, m, mu) / direct - 1)))
    quad_worst = 0.0
    for beta in (gamma, gamma - 1.0, 0.0):
        rule = DiskRule.for_truncation(beta, quad_max, quad_max)
        r, phi, _, _, w = rule.grid()
        tab = basis_table(beta, quad_max, quad_max, r, phi)
        q = np.sum(tab**2 * w, axis=(-2, -1))
        exact = norm_sq_grid(beta, quad_max, quad_max)
        mask = valid_mask(quad_max, quad_max)
        quad_worst = max(quad_worst, float(np.max(np.abs(q[mask] / exact[mask] - 1))))
    ok = {"closed_form_ratios": bool(worst <= 1e-12), "quadrature_norms": bool(quad_worst <= 1e-10)}
    return CheckResult(
        "norm_ratio_identities", alpha, float(worst), 0.0, "==", all(ok.values()), 1e-12,
        {"lmax": lmax, "nmax": nmax, "shift_max": shift_max, "quad_max": quad_max},
        {"subchecks": ok, "ratio_rel_err": float(worst), "quadrature_rel_err": quad_worst},
    )


def _norms_batch(batch, gamma, L, N, s):
    w = sobolev_weight(L, N, s) * norm_sq_grid(gamma, L, N)
    return np.sqrt(np.sum(batch**2 * w[None], axis=(1, 2, 3)))


def mapping_ratios(alpha: float, L: int, N: int, t: float, n_random: int, seed: int) -> dict:
    """Image/source norm ratios of the four Riesz and gradient maps on random inputs.

    Inputs are iid normal in coordinates normalized by the source norm, so
    each ratio is an average of per-mode ratios over the truncation.
    """
    h = alpha / 2.0
    rng = np.random.default_rng(seed)
    mask = valid_mask(L, N)[None]
    z = rng.standard_normal((n_random, 2, L + 1, N + 1)) * mask
    out = {}

    def scaled(gamma):
        w = sobolev_weight(L, N, t) * np.where(mask[0], norm_sq_grid(gamma, L, N), 1.0)
        return z / np.sqrt(w)[None]

    # scalar Riesz operator on (1-r^2)^{h-1} P^{(h-1)}: H^t -> H^{t+2-alpha}
    src = scaled(h - 1.0)
    img = src * riesz_diagonal_factors(L, N, alpha)[None]
    out["riesz_scalar"] = _norms_batch(img, h - 1.0, L, N, t + 2.0 - alpha) / _norms_batch(src, h - 1.0, L, N, t)

    def vec_ratio(mats, src, g_in, g_out, s_out, Lo, No):
        flat = src.reshape(n_random, -1).T
        ix = (mats[0] @ flat).T.reshape(n_random, 2, Lo + 1, No + 1)
        iy = (mats[1] @ flat).T.reshape(n_random, 2, Lo + 1, No + 1)
        num = np.hypot(_norms_batch(ix, g_out, Lo, No, s_out), _norms_batch(iy, g_out, Lo, No, s_out))
        return num / _norms_batch(src, g_in, L, N, t)

    src = scaled(h)
    out["grad_unweighted"] = vec_ratio(grad_unweighted_matrices(L, N, h), src, h, h + 1.0, t - 1.0, L + 1, N)
    out["grad_weighted"] = vec_ratio(grad_weighted_matrices(L, N, h), src, h, h - 1.0, t - 1.0, L + 1, N + 1)
    out["riesz_grad"] = vec_ratio(riesz_grad_matrices(L, N, float(alpha)), src, h, h - 1.0, t + 1.0 - alpha,
                                  L + 1, N + 1)
    return {k: float(np.mean(v)) for k, v in out.items()}


def check_mapping_properties(alpha: float, t_values=(0.0, 0.5, 1.0), truncs=(50, 100, 200),
                             n_random: int = 4, seed: int = 0) -> CheckResult:
    """Stability of image/source norm ratios as the truncation doubles.

    Also checks that the Riesz gradient equals the Riesz operator composed with
    the weighted gradient, and the per-mode Riesz factor against its large-n
    asymptotic ``2^{alpha-2} ((n+1)(n+l+1))^{alpha/2-1}``.
    """
    _check_alpha(alpha)
    table = {}
    variation = 0.0
    for t in t_values:
        rows = [mapping_ratios(alpha, T, T, t, n_random, seed) for T in truncs]
        for key in rows[0]:
            vals = np.array([r[key] for r in rows])
            table[f"{key}@t={t:g}"] = vals.tolist()
            variation = max(variation, float(vals.max() / vals.min() - 1.0))
    # composition oracle
    rng = np.random.default_rng(seed)
    h = alpha / 2.0
    c = rng.standard_normal((2, 9, 9)) * valid_mask(8, 8)
    v = CoeffVec(h, h, c)
    direct = riesz_grad(v, alpha)
    composed = riesz_apply(coeff_ops.grad_weighted(v), alpha)
    scale = max(np.abs(direct.x.coeffs).max(), np.abs(direct.y.coeffs).max())
    comp_err = max(np.abs(direct.x.coeffs - composed.x.coeffs).max(),
                   np.abs(direct.y.coeffs - composed.y.coeffs).max()) / scale
    # Stirling comparison for n >= 50
    L = N = 120
    l, n, _ = index_grids(L, N)
    fac = riesz_diagonal_factors(L, N, alpha)
    pred = 2.0 ** (alpha - 2.0) * ((n + 1.0) * (n + l + 1.0)) ** (h - 1.0)
    sel = valid_mask(L, N) & (n >= 50)
    stirling = float(np.max(np.abs(fac[sel] / pred[sel] - 1.0)))
    zero_map = np.abs(grad_unweighted_matrices(4, 4, h) [0][:, 0].toarray()).max()
    ok = {
        "ratios_vary_below_10pct": bool(variation < 0.10),
        "composition_1e-12": bool(comp_err <= 1e-12),
        "stirling_within_10pct": bool(stirling <= 0.10),
        "constant_maps_to_zero": bool(zero_map == 0.0),
    }
    return CheckResult(
        "mapping_properties", alpha, variation, 0.10, "<=", all(ok.values()), 0.0,
        {"t_values": list(t_values), "truncs": list(truncs), "n_random": n_random, "seed": seed},
        {"subchecks": ok, "ratios": table, "composition_err": float(comp_err), "stirling_err": stirling},
    )


def check_selfadjointness(alpha: float, lmax: int = 8, nmax: int = 8) -> CheckResult:
    """Symmetry of the Riesz pairing and of the identity-diffusivity weak form.

    For weighted modes ``f_i = (1-r^2)^{alpha/2} phi_i`` the pairing
    ``S_ij = integral R(f_i) f_j`` is built entirely by quadrature: ``f_i`` is
    projected onto the ``alpha/2 - 1`` family, the Riesz operator applied
    spectrally, and the result integrated against ``f_j``.
    """
    _check_alpha(alpha)
    h = alpha / 2.0
    L, N = lmax, nmax
    rule = DiskRule.for_truncation(h - 1.0, L, N + 1, 4)
    r, phi, _, _, w = rule.grid()
    omega = 1.0 - r**2
    psi = basis_table(h - 1.0, L, N + 1, r, phi).reshape(2 * (L + 1) * (N + 2), -1)
    phis = basis_table(h, L, N, r, phi).reshape(2 * (L + 1) * (N + 1), -1)[trial_positions(L, N)]
    wf = w.reshape(-1)
    nsq = norm_sq_grid(h - 1.0, L, N + 1).reshape(-1)
    fi = phis * omega.reshape(-1)  # (1-r^2)^{h} phi_i divided by the weight (1-r^2)^{h-1}
    proj = (fi * wf) @ psi.T
    coef = np.divide(proj, nsq, out=np.zeros_like(proj), where=nsq > 0)
    rf = (coef * riesz_diagonal_factors(L, N + 1, alpha).reshape(-1)) @ psi
    S = (rf * wf * omega.reshape(-1)) @ phis.T
    scale = np.abs(S).max()
    asym = float(np.abs(S - S.T).max() / scale)
    Bq = _gram(alpha, L, N, identity_K(), QUADRATURE, 0)
    asym_b = float(np.abs(Bq - Bq.T).max() / np.abs(Bq).max())
    eig_min = float(np.linalg.eigvalsh(0.5 * (S + S.T)).min())
    tol = 1e-10
    return CheckResult(
        "selfadjointness", alpha, max(asym, asym_b), 0.0, "==", bool(asym <= tol and asym_b <= tol), tol,
        {"lmax": lmax, "nmax": nmax},
        {"riesz_pairing_asymmetry": asym, "weak_form_asymmetry": asym_b, "riesz_pairing_min_eig": eig_min},
    )


def radial_K(eps: float) -> DiffusivitySpec:
    k = lambda x, y: 1.0 + eps * (x * x + y * y)
    zero = lambda x, y: 0.0 * x
    return DiffusivitySpec(k, zero, k, f"radial:{eps:g}", False, 2, {"eps": eps})


def check_manufactured(alpha: float = 1.5, L: int = 12, N: int = 12, seed: int = 0) -> CheckResult:
    """Recover prescribed coefficients from their forward image.

    Identity diffusivity uses random coefficients on the full truncation
    (tolerance 1e-12); ``K = (1 + 0.1 r^2) I`` uses the two-mode solution
    ``(1-r^2)^{alpha/2} (phi_{0,0,+1} + 0.3 phi_{2,1,-1})`` (tolerance 1e-8).
    """
    _check_alpha(alpha)
    h = alpha / 2.0
    rng = np.random.default_rng(seed)
    u = CoeffVec(h, h, rng.standard_normal((2, L + 1, N + 1)) * valid_mask(L, N))
    K = identity_K()
    f = apply_operator(u, alpha, K)
    rep = solve(SolveConfig(alpha, L, N, K, f, tol=1e-12, measure_infsup=False))
    err_id = float(np.abs(rep.solution.coeffs - u.coeffs).max() / np.abs(u.coeffs).max())
    u2 = CoeffVec.from_modes({(0, 0, 1): 1.0, (2, 1, -1): 0.3}, h, h, L=L, N=N)
    Kr = radial_K(0.1)
    f2 = apply_operator(u2, alpha, Kr)
    rep2 = solve(SolveConfig(alpha, L, N, Kr, f2, tol=1e-10, measure_infsup=False))
    err_var = float(np.abs(rep2.solution.coeffs - u2.coeffs).max())
    ok = {"identity_1e-12": bool(err_id <= 1e-12), "radial_K_1e-8": bool(err_var <= 1e-8)}
    return CheckResult(
        "manufactured", alpha, max(err_id, err_var), 0.0, "==", all(ok.values()), 1e-8,
        {"L": L, "N": N, "seed": seed},
        {"subchecks": ok, "identity_err": err_id, "radial_err": err_var},
    )


def exploratory_contrast(alpha: float, L: int = 10, N: int = 10, factors=(0.9, 1.05, 1.5, 3.0)) -> CheckResult:
    """Solve with ``K = diag(1, c)`` around the admissible contrast and record invertibility.

    Exploratory only: there is no verdict.
    """
    _check_alpha(alpha)
    crit = wellposed_ratio(alpha)
    rows = []
    for fct in factors:
        K = DiffusivitySpec.constant_tensor(1.0, 0.0, fct * crit, f"diag:1,{fct * crit:g}")
        B = _gram(alpha, L, N, K, CLOSED_FORM, 0)
        sigma = discrete_infsup(B, alpha, L, N)
        rows.append({"contrast": fct * crit, "factor": fct, "sigma_min": sigma, "invertible": bool(sigma > 1e-12)})
    return CheckResult(
        "exploratory_contrast", alpha, min(r["sigma_min"] for r in rows), 0.0, ">=", None, 0.0,
        {"L": L, "N": N, "critical_contrast": crit}, {"runs": rows},
    )


SUITES = {
    "constants": lambda a, seed: [
        (check_ratio_bounds, (a,), {}),
        (check_sup_formulas, (a,), {}),
        (check_norm_equivalence, (a,), {"seed": seed}),
        *[(check_w_bound, (a,), {"s_weight": s, "seed": seed}) for s in (0.0, -0.5, 0.5, 1.0)],
        *[(check_infsup, (a,), {"L": t, "N": t, "seed": seed}) for t in (8, 12, 16)],
    ],
    "operators": lambda a, seed: [
        (check_eigen_identity, (a,), {}),
        (check_norm_ratio_identities, (a,), {}),
        (check_mapping_properties, (a,), {"seed": seed}),
        (check_selfadjointness, (a,), {}),
    ],
    "solver": lambda a, seed: [(check_manufactured, (a,), {"seed": seed})],
    "exploratory": lambda a, seed: [(exploratory_contrast, (a,), {})],
}
SUITES["all"] = lambda a, seed: SUITES["constants"](a, seed) + SUITES["operators"](a, seed) + SUITES["solver"](a, seed)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_suite(alpha: float, suite: str = "all", threads: int | None = None, seed: int = 0) -> list[CheckResult]:
    """Run a named suite; results come back in suite order whatever the thread count.

    ``seed`` is passed to every randomized check.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    jobs = SUITES[suite](alpha, seed)
    threads = thread_count() if threads is None else threads
    if threads <= 1:
        return [fn(*args, **kw) for fn, args, kw in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, *args, **kw) for fn, args, kw in jobs]
        return [f.result() for f in futures]
