import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdisk.disk_basis import (
    BasisIndex,
    CoeffVec,
    VecCoeffField,
    basis_eval,
    basis_norm_sq,
    basis_table,
    harmonic_eval,
    mode_list,
    norm_ratio_lower,
    norm_ratio_raise,
    norm_ratio_weight_shift,
    norm_sq_grid,
    sobolev_norm,
    valid_mask,
)
from fracdisk.errors import DomainError, InvalidIndexError, RepresentationError
from fracdisk.quadrature import DiskRule
from oracles import jacobi_series

# squared norms from one-dimensional mpmath quadrature in r (40 digits)
NORM_REF = [
    ((0, 0, 1, 0.75), 0.44879895051282760549),
    ((1, 0, 1, 0.75), 0.32639923673660189491),
    ((2, 3, -1, 0.75), 0.11797332032491155739),
    ((3, 2, 1, -0.25), 0.24826291690661740054),
    ((0, 4, 1, -0.4), 0.091325367836912594377),
    ((5, 1, -1, 0.0), 0.1963495408493620774),
]


def test_harmonics():
    x, y = 0.3, -0.4
    assert harmonic_eval(0, 1, x, y) == 0.5
    assert harmonic_eval(0, -1, x, y) == 0.0
    assert harmonic_eval(-1, 1, x, y) == 0.0
    assert harmonic_eval(1, 1, x, y) == pytest.approx(x)
    assert harmonic_eval(1, -1, x, y) == pytest.approx(y)
    assert harmonic_eval(2, 1, x, y) == pytest.approx(x * x - y * y)
    assert harmonic_eval(2, -1, x, y) == pytest.approx(2 * x * y)
    r, phi = np.hypot(x, y), np.arctan2(y, x)
    assert harmonic_eval(5, -1, x, y) == pytest.approx(r**5 * np.sin(5 * phi))


def test_basis_eval_against_series():
    x, y = 0.21, 0.55
    rho = 2 * (x * x + y * y) - 1
    for l, n, mu, g in [(0, 3, 1, 0.75), (2, 4, -1, -0.25), (4, 1, 1, 0.6)]:
        ref = harmonic_eval(l, mu, x, y) * jacobi_series(n, g, l, rho)
        assert basis_eval(BasisIndex(l, n, mu), g, x, y) == pytest.approx(ref, rel=1e-12)


def test_basis_eval_negative_index_zero_and_outside_disk():
    assert basis_eval(BasisIndex(-1, 2, 1), 0.75, 0.1, 0.1) == 0.0
    assert basis_eval(BasisIndex(1, -1, 1), 0.75, 0.1, 0.1) == 0.0
    with pytest.raises(DomainError):
        basis_eval(BasisIndex(0, 0, 1), 0.75, 1.0, 0.5)


def test_basis_table_matches_pointwise():
    r = np.array([0.0, 0.3, 0.8, 1.0])
    phi = np.array([0.0, 1.0, 2.0, 3.0])
    tab = basis_table(0.75, 3, 2, r, phi)
    for l, n, mu in mode_list(3, 2):
        pt = basis_eval(BasisIndex(l, n, mu), 0.75, r * np.cos(phi), r * np.sin(phi))
        assert np.allclose(tab[0 if mu == 1 else 1, l, n], pt, atol=1e-14)
    assert np.all(tab[1, 0] == 0.0)


@pytest.mark.parametrize("args,ref", NORM_REF)
def test_basis_norm_sq_reference(args, ref):
    assert basis_norm_sq(*args) == pytest.approx(ref, rel=1e-13)


def test_basis_norm_sq_errors():
    with pytest.raises(InvalidIndexError):
        basis_norm_sq(0, 2, -1, 0.75)
    with pytest.raises(InvalidIndexError):
        basis_norm_sq(-1, 0, 1, 0.75)
    with pytest.raises(DomainError):
        basis_norm_sq(1, 0, 1, -1.0)


@pytest.mark.parametrize("beta", [0.75, -0.25, 0.0])
def test_basis_orthogonal_under_quadrature(beta):
    L = N = 5
    rule = DiskRule.for_truncation(beta, L, N)
    r, phi, _, _, w = rule.grid()
    tab = basis_table(beta, L, N, r, phi)[valid_mask(L, N)].reshape(-1, w.size)
    gram = (tab * w.reshape(-1)) @ tab.T
    exact = norm_sq_grid(beta, L, N)[valid_mask(L, N)]
    assert np.allclose(np.diag(gram), exact, rtol=1e-12)
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off) / np.sqrt(np.outer(exact, exact))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(l=st.integers(1, 20), n=st.integers(0, 20), k=st.integers(1, 3), j=st.integers(0, 3), m=st.integers(0, 3),
       mu=st.sampled_from([1, -1]), gamma=st.sampled_from([0.6, 0.75, 0.9, -0.25]))
def test_norm_ratio_identities(l, n, k, j, m, mu, gamma):
    base = basis_norm_sq(l, n, mu, gamma)
    assert norm_ratio_weight_shift(l, n, gamma, k) == pytest.approx(basis_norm_sq(l, n, mu, gamma + k) / base, rel=1e-12)
    assert norm_ratio_raise(l, n, gamma, j, m, mu) == pytest.approx(basis_norm_sq(l + j, n + m, mu, gamma) / base, rel=1e-12)
    if j <= m and j <= l and (l - j >= 1 or mu == 1):
        direct = basis_norm_sq(l - j, n + m, mu, gamma) / base
        assert norm_ratio_lower(l, n, gamma, j, m, mu) == pytest.approx(direct, rel=1e-12)


def test_norm_ratio_raise_from_constant_harmonic():
    # l = 0 -> l = 1 changes the angular constant from pi/2 to pi
    direct = basis_norm_sq(1, 2, 1, 0.75) / basis_norm_sq(0, 2, 1, 0.75)
    assert norm_ratio_raise(0, 2, 0.75, 1, 0) == pytest.approx(direct, rel=1e-13)


def test_coeffvec_construction_and_access():
    u = CoeffVec.from_modes({(0, 0, 1): 2.0, (2, 1, -1): 0.5}, 0.75, 0.75)
    assert (u.L, u.N) == (2, 1)
    assert u.get(2, 1, -1) == 0.5 and u.get(5, 5, 1) == 0.0
    assert list(u.modes()) == [(BasisIndex(0, 0, 1), 2.0), (BasisIndex(2, 1, -1), 0.5)]
    with pytest.raises(ValueError):
        u.coeffs[0, 0, 0] = 1.0
    with pytest.raises(InvalidIndexError):
        CoeffVec.from_modes({(0, 1, -1): 1.0}, 0.75, 0.75)
    with pytest.raises(InvalidIndexError):
        CoeffVec.from_modes({(3, 0, 1): 1.0}, 0.75, 0.75, L=2, N=2)


def test_coeffvec_arithmetic_and_mismatch():
    a = CoeffVec.from_modes({(1, 0, 1): 1.0}, 0.75, 0.75)
    b = CoeffVec.from_modes({(0, 2, 1): 3.0}, 0.75, 0.75)
    c = a + 2 * b - a
    assert c.get(0, 2, 1) == 6.0 and c.get(1, 0, 1) == 0.0
    with pytest.raises(RepresentationError):
        a + CoeffVec.from_modes({(1, 0, 1): 1.0}, 0.75, 0.0)
    with pytest.raises(RepresentationError):
        a - CoeffVec.from_modes({(1, 0, 1): 1.0}, -0.25, 0.75)
    with pytest.raises(RepresentationError):
        VecCoeffField(a, CoeffVec.from_modes({(1, 0, 1): 1.0}, 0.75, 0.0))


def test_evaluate_constant_mode_gives_weight():
    alpha = 1.5
    u = CoeffVec.from_modes({(0, 0, 1): 2.0}, alpha / 2, alpha / 2)
    x = np.array([0.0, 0.3, -0.5, 0.6])
    y = np.array([0.0, 0.4, 0.1, -0.8])
    assert np.allclose(u.evaluate(x, y), np.clip(1 - x * x - y * y, 0, None) ** (alpha / 2), atol=1e-15)
    assert u.evaluate(1.0, 0.0) == 0.0


def test_sobolev_norm_properties():
    rng = np.random.default_rng(3)
    c = rng.standard_normal((2, 6, 6)) * valid_mask(5, 5)
    u = CoeffVec(0.75, 0.75, c)
    assert sobolev_norm(u, 0.0) ** 2 == pytest.approx(u.l2_norm_sq())
    vals = [sobolev_norm(u, s) for s in (-1.0, -0.5, 0.0, 0.5, 1.0, 2.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    single = CoeffVec.from_modes({(2, 3, 1): 1.0}, 0.75, 0.75)
    expect = np.sqrt((4 * 6) ** 1.0 * basis_norm_sq(2, 3, 1, 0.75))
    assert sobolev_norm(single, 1.0) == pytest.approx(expect)


def test_with_truncation_pads_and_cuts():
    u = CoeffVec.from_modes({(1, 1, 1): 1.0, (3, 0, -1): 2.0}, 0.75, 0.75)
    assert u.with_truncation(5, 5).get(3, 0, -1) == 2.0
    cut = u.with_truncation(2, 2)
    assert cut.get(3, 0, -1) == 0.0 and cut.get(1, 1, 1) == 1.0


def test_documented_point_values():
    assert harmonic_eval(1, 1, 0.5, 0.0) == pytest.approx(0.5)
    c = np.cos(np.pi / 4)
    assert harmonic_eval(2, -1, c, c) == pytest.approx(1.0)
    assert basis_eval(BasisIndex(0, 0, 1), 0.75, 0.2, 0.1) == 0.5
    assert basis_eval(BasisIndex(1, 1, 1), 0.0, 1.0, 0.0) == pytest.approx(1.0)
    assert basis_eval(BasisIndex(2, 0, -1), 0.5, 0.0, 0.6) == pytest.approx(0.0, abs=1e-15)
    assert basis_norm_sq(0, 0, 1, 0.0) == pytest.approx(np.pi / 4)
    assert norm_ratio_weight_shift(0, 0, 0.0, 0) == 1.0
    assert norm_ratio_weight_shift(0, 0, 0.0, 1) == pytest.approx(0.5)


def test_sobolev_single_mode_and_duality():
    single = CoeffVec.from_modes({(3, 4, -1): -1.5}, 0.75, 0.75)
    assert sobolev_norm(single, 1.0) == pytest.approx(np.sqrt(5 * 8) * 1.5 * np.sqrt(basis_norm_sq(3, 4, -1, 0.75)))
    assert sobolev_norm(CoeffVec.from_modes({(0, 0, 1): 1.0}, 0.75, 0.75), 2.0) == pytest.approx(
        np.sqrt(basis_norm_sq(0, 0, 1, 0.75)))
    rng = np.random.default_rng(21)
    for s in (0.5, 1.0, 2.5):
        for _ in range(20):
            a = CoeffVec(0.6, 0.0, rng.standard_normal((2, 6, 6)) * valid_mask(5, 5))
            b = CoeffVec(0.6, 0.0, rng.standard_normal((2, 6, 6)) * valid_mask(5, 5))
            pairing = abs(np.sum(a.coeffs * b.coeffs * a.norm_sq_grid()))
            assert pairing <= sobolev_norm(a, s) * sobolev_norm(b, -s) * (1 + 1e-12)
