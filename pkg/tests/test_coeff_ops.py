import numpy as np
import pytest
import sympy as sp
from scipy.special import gammaln
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdisk.coeff_ops import (
    frac_laplacian_eigenvalue,
    grad_unweighted,
    grad_weighted,
    riesz_apply,
    riesz_diagonal_factors,
    riesz_grad,
    riesz_scalar,
    test_map,
    residual_field,
    w_residual,
)
from fracdisk.disk_basis import BasisIndex, CoeffVec, valid_mask
from fracdisk.errors import DomainError, PreconditionError, RepresentationError
from oracles import central_gradient, interior_points

# lambda_{l,n}(alpha) from mpmath gamma values (40 digits)
EIG_REF = [
    ((0, 0, 1.5), 2.3891043071046817413),
    ((2, 3, 1.5), 29.516719598254864527),
    ((5, 7, 1.2), 36.389412904494417441),
    ((0, 1, 1.999), 15.974167551667362765),
]

# Projections of central-difference gradients of (1-r^2)^{0.75} phi onto the
# P^{(-0.25, l)} family, obtained by quadrature, rounded to the exact values.
FD_GRAD_REF = {
    (1, 0, 1): ({(0, 1, 1): -2.0, (2, 0, 1): -0.75}, {(2, 0, -1): -0.75}),
    (1, 1, 1): ({(0, 2, 1): -4.0, (2, 1, 1): -1.75}, {(2, 1, -1): -1.75}),
    (1, 0, -1): ({(2, 0, -1): -0.75}, {(0, 1, 1): -2.0, (2, 0, 1): 0.75}),
    (2, 1, -1): ({(1, 2, -1): -2.0, (3, 1, -1): -1.75}, {(1, 2, 1): -2.0, (3, 1, 1): 1.75}),
    (0, 0, 1): ({(1, 0, 1): -0.75}, {(1, 0, -1): -0.75}),
}


def _mode(l, n, mu, gamma, prefactor):
    return CoeffVec.from_modes({(l, n, mu): 1.0}, gamma, prefactor)


def _nonzero(cv):
    return {tuple(i): v for i, v in cv.modes()}


@pytest.mark.parametrize("args,ref", EIG_REF)
def test_eigenvalue_reference(args, ref):
    assert frac_laplacian_eigenvalue(*args) == pytest.approx(ref, rel=1e-13)


def test_eigenvalue_special_values():
    assert frac_laplacian_eigenvalue(0, 0, 1.0) == pytest.approx(np.pi / 2, rel=1e-14)
    l, n = np.meshgrid(np.arange(6), np.arange(6), indexing="ij")
    assert frac_laplacian_eigenvalue(l, n, 2.0) == pytest.approx(4.0 * (n + 1) * (n + l + 1), rel=1e-13)
    assert frac_laplacian_eigenvalue(0, 1, 1.999) == pytest.approx(16.0, rel=5e-3)
    with pytest.raises(DomainError):
        frac_laplacian_eigenvalue(0, 0, 2.5)


@pytest.mark.parametrize("alpha", [0.3, 1.2, 1.9])
def test_eigenvalue_increasing(alpha):
    lam = frac_laplacian_eigenvalue(*np.meshgrid(np.arange(30), np.arange(30), indexing="ij"), alpha)
    assert np.all(np.diff(lam, axis=0) > 0) and np.all(np.diff(lam, axis=1) > 0)


@pytest.mark.parametrize("src,expected", FD_GRAD_REF.items())
def test_weighted_gradient_stencil_table(src, expected):
    G = grad_weighted(_mode(*src, 0.75, 0.75))
    gx, gy = expected
    assert _nonzero(G.x) == pytest.approx(gx) and set(_nonzero(G.x)) == set(gx)
    assert _nonzero(G.y) == pytest.approx(gy) and set(_nonzero(G.y)) == set(gy)
    assert G.gamma == pytest.approx(-0.25) and G.prefactor == pytest.approx(-0.25)


@pytest.mark.parametrize("gamma,prefactor,op", [(0.75, 0.75, grad_weighted), (0.9, 0.9, grad_weighted),
                                                 (0.6, 0.0, grad_unweighted), (-0.25, 0.0, grad_unweighted)])
def test_gradients_against_finite_differences(gamma, prefactor, op):
    rng = np.random.default_rng(11)
    c = rng.standard_normal((2, 5, 5)) * valid_mask(4, 4)
    u = CoeffVec(gamma, prefactor, c)
    G = op(u)
    x, y = interior_points(rng, 200)
    fx, fy = central_gradient(u.evaluate, x, y)
    scale = max(np.abs(fx).max(), np.abs(fy).max())
    assert np.abs(fx - G.x.evaluate(x, y)).max() <= 1e-6 * scale
    assert np.abs(fy - G.y.evaluate(x, y)).max() <= 1e-6 * scale


@pytest.mark.parametrize("l", [0, 1, 2, 3])
@pytest.mark.parametrize("mu", [1, -1])
def test_weighted_gradient_symbolic(l, mu):
    if l == 0 and mu == -1:
        return
    X, Y = sp.symbols("x y", real=True)
    h = sp.Rational(3, 4)
    z = sp.expand((X + sp.I * Y) ** l)
    harm = sp.Rational(1, 2) if l == 0 else (sp.re(z) if mu == 1 else sp.im(z))
    field = (1 - X**2 - Y**2) ** h * harm
    dx = sp.lambdify((X, Y), sp.diff(field, X), "numpy")
    dy = sp.lambdify((X, Y), sp.diff(field, Y), "numpy")
    G = grad_weighted(_mode(l, 0, mu, 0.75, 0.75))
    pts = np.array([[0.1, 0.2], [-0.5, 0.3], [0.4, -0.6], [0.0, 0.7]])
    for px, py in pts:
        assert G.x.evaluate(px, py) == pytest.approx(float(dx(px, py)), rel=1e-12, abs=1e-13)
        assert G.y.evaluate(px, py) == pytest.approx(float(dy(px, py)), rel=1e-12, abs=1e-13)


def test_unweighted_gradient_simple_fields():
    # x = phi_{1,0,+1}: d/dx = 1 = 2 * H_{0,+1}; constants map to zero
    G = grad_unweighted(_mode(1, 0, 1, 0.75, 0.0))
    assert _nonzero(G.x) == {(0, 0, 1): 2.0}
    assert _nonzero(G.y) == {}
    G0 = grad_unweighted(_mode(0, 0, 1, 0.75, 0.0))
    assert not np.any(G0.x.coeffs) and not np.any(G0.y.coeffs)


def test_riesz_scalar_cases():
    alpha = 1.5
    tgt, fac = riesz_scalar(BasisIndex(2, 3, 1), alpha, 1)
    assert tgt == (2, 3, 1)
    assert fac == pytest.approx(riesz_diagonal_factors(2, 3, alpha)[0, 2, 3], rel=1e-14)
    tgt0, fac0 = riesz_scalar(BasisIndex(2, 3, -1), alpha, 0)
    assert tgt0 == (2, 4, -1) and fac0 < 0
    with pytest.raises(DomainError):
        riesz_scalar(BasisIndex(0, 0, 1), alpha, 2)


def test_riesz_grad_is_riesz_of_gradient():
    rng = np.random.default_rng(5)
    for alpha in (1.2, 1.5, 1.8):
        h = alpha / 2
        v = CoeffVec(h, h, rng.standard_normal((2, 8, 8)) * valid_mask(7, 7))
        direct = riesz_grad(v, alpha)
        composed = riesz_apply(grad_weighted(v), alpha)
        scale = np.abs(direct.x.coeffs).max()
        assert np.abs(direct.x.coeffs - composed.x.coeffs).max() <= 1e-12 * scale
        assert np.abs(direct.y.coeffs - composed.y.coeffs).max() <= 1e-12 * scale


def test_test_map_reference_factor():
    # 2^{0.5} * 4 * Gamma(4) Gamma(6) / (Gamma(4.75) Gamma(5.75)) via mpmath
    v = test_map(_mode(2, 3, 1, 0.75, 0.75), 1.5)
    assert v.get(2, 3, 1) == pytest.approx(3.1168775274552993869, rel=1e-13)
    w = test_map(_mode(2, 3, 1, 0.75, 0.75), 1.5, s_weight=0.5)
    assert w.get(2, 3, 1) == pytest.approx(3.1168775274552993869 * (4 * 6) ** 0.5, rel=1e-13)


def test_w_residual_vanishes_on_low_targets():
    rng = np.random.default_rng(2)
    alpha = 1.5
    u = CoeffVec(0.75, 0.75, rng.standard_normal((2, 7, 7)) * valid_mask(6, 6))
    W = residual_field(u, alpha)
    assert np.abs(W.x.coeffs[:, :2]).max() < 1e-12 and np.abs(W.y.coeffs[:, :2]).max() < 1e-12
    radial_only = CoeffVec.from_modes({(0, n, 1): rng.standard_normal() for n in range(6)}, 0.75, 0.75)
    W0 = residual_field(radial_only, alpha)
    assert W0.l2_norm_sq() < 1e-26


def test_representation_errors():
    with pytest.raises(RepresentationError):
        grad_weighted(_mode(1, 0, 1, 0.75, 0.0))
    with pytest.raises(PreconditionError):
        grad_weighted(_mode(1, 0, 1, -0.25, -0.25))
    with pytest.raises(RepresentationError):
        riesz_grad(_mode(1, 0, 1, 0.6, 0.6), 1.5)
    with pytest.raises(RepresentationError):
        grad_unweighted(_mode(1, 0, 1, 0.75, 0.75))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_operators_are_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    mk = lambda: CoeffVec(0.75, 0.75, rng.standard_normal((2, 5, 4)) * valid_mask(4, 3))
    u, v = mk(), mk()
    for op in (grad_weighted, lambda w: riesz_grad(w, 1.5)):
        lhs = op(a * u + b * v)
        rhs_x = a * op(u).x.coeffs + b * op(v).x.coeffs
        assert np.allclose(lhs.x.coeffs, rhs_x, atol=1e-12 * (1 + np.abs(rhs_x).max()))


def test_riesz_scalar_limits():
    _, fac = riesz_scalar(BasisIndex(0, 0, 1), 1.0, 1)
    assert fac == pytest.approx(np.pi / 2, rel=1e-14)
    fac2 = riesz_diagonal_factors(10, 10, 2.0)
    assert np.allclose(fac2[0], 1.0, rtol=1e-13) and np.allclose(fac2[1, 1:], 1.0, rtol=1e-13)


def test_riesz_grad_single_constant_mode():
    alpha = 1.5
    h = alpha / 2
    c2 = -(2 ** (alpha - 2)) * np.exp(gammaln(1 + h) + gammaln(h))
    V = riesz_grad(_mode(0, 0, 1, h, h), alpha)
    assert _nonzero(V.x) == pytest.approx({(1, 0, 1): c2 * h})
    assert _nonzero(V.y) == pytest.approx({(1, 0, -1): c2 * h})


@pytest.mark.parametrize("src", [(0, 0, 1), (1, 0, 1), (1, 0, -1)])
def test_riesz_grad_approaches_gradient_near_classical(src):
    alpha = 1.999
    h = alpha / 2
    V, U = riesz_grad(_mode(*src, h, h), alpha), grad_weighted(_mode(*src, h, h))
    scale = np.abs(U.x.coeffs).max() + np.abs(U.y.coeffs).max()
    assert np.abs(V.x.coeffs - U.x.coeffs).max() <= 1e-3 * scale
    assert np.abs(V.y.coeffs - U.y.coeffs).max() <= 1e-3 * scale


def test_riesz_grad_equals_gradient_at_classical_order():
    rng = np.random.default_rng(8)
    c = rng.standard_normal((2, 8, 8)) * valid_mask(7, 7)
    V, U = riesz_grad(CoeffVec(1.0, 1.0, c), 2.0), grad_weighted(CoeffVec(1.0, 1.0, c))
    assert np.allclose(V.x.coeffs, U.x.coeffs, rtol=1e-13, atol=1e-13)
    # the gap closes linearly in 2 - alpha
    gaps = []
    for eps in (1e-2, 1e-3, 1e-4):
        a = 2.0 - eps
        v = CoeffVec(a / 2, a / 2, c)
        gaps.append(np.abs(riesz_grad(v, a).x.coeffs - grad_weighted(v).x.coeffs).max())
    assert gaps[0] / gaps[1] == pytest.approx(10, rel=0.05) and gaps[1] / gaps[2] == pytest.approx(10, rel=0.05)


def test_test_map_classical_and_zero():
    rng = np.random.default_rng(9)
    c = rng.standard_normal((2, 5, 5)) * valid_mask(4, 4)
    out = test_map(CoeffVec(1.0, 1.0, c), 2.0).coeffs
    # the gamma-ratio factor telescopes to 1 at alpha = 2
    assert np.allclose(out, c, rtol=1e-13, atol=0)
    assert not np.any(test_map(CoeffVec.zeros(0.75, 0.75, 3, 3), 1.5).coeffs)


def test_zero_inputs_map_to_zero():
    z = CoeffVec.zeros(0.75, 0.75, 3, 3)
    for field in (grad_weighted(z), riesz_grad(z, 1.5), grad_unweighted(CoeffVec.zeros(0.75, 0.0, 3, 3))):
        assert not np.any(field.x.coeffs) and not np.any(field.y.coeffs)


def test_w_residual_of_equal_fields_is_zero():
    U = grad_weighted(_mode(2, 1, 1, 0.75, 0.75))
    assert w_residual(U, U).l2_norm_sq() == 0.0
    with pytest.raises(RepresentationError):
        w_residual(U, grad_weighted(_mode(2, 1, 1, 0.6, 0.6)))


@pytest.mark.parametrize("src", [(1, 0, 1), (1, 2, -1), (2, 3, -1), (3, 1, 1), (5, 0, -1)])
def test_residual_support_is_raised_channel(src):
    l, n, _ = src
    W = residual_field(_mode(*src, 0.75, 0.75), 1.5)
    for comp in (W.x, W.y):
        for (tl, tn, _), val in comp.modes():
            assert (tl, tn) == (l + 1, n) or abs(val) < 1e-14


@pytest.mark.parametrize("alpha", [1.1, 1.5, 1.9])
def test_residual_ratio_below_bound_on_random_inputs(alpha):
    h = alpha / 2
    rng = np.random.default_rng(10)
    bound = (2 - alpha) / np.sqrt(alpha * (2 + alpha))
    for _ in range(1000):
        L, N = rng.integers(1, 9, size=2)
        u = CoeffVec(h, h, rng.standard_normal((2, L + 1, N + 1)) * valid_mask(L, N))
        U = grad_weighted(u)
        W = residual_field(u, alpha)
        assert np.sqrt(W.l2_norm_sq() / U.l2_norm_sq()) <= bound * (1 + 1e-12)
