import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dtb import linalg
from dtb.errors import DomainError, NonSymmetric, NotPositiveDefinite, ShapeMismatch, Singular
from dtb.linalg import BlockMatrix

import oracles


def random_spd(rng, n, cond=100.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.geomspace(1.0, cond, n)
    return (q * lam) @ q.T


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def spd_matrices(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    g = draw(arrays(float, (n, n), elements=finite))
    return g @ g.T + n * np.eye(n)


# ---------------------------------------------------------------- cholesky


def test_cholesky_identity():
    assert np.array_equal(linalg.cholesky_upper(np.eye(2)), np.eye(2))


def test_cholesky_worked_example():
    r = linalg.cholesky_upper(np.array(oracles.CHOLESKY_INPUT))
    np.testing.assert_allclose(r.T, oracles.CHOLESKY_RT, atol=1e-15)


def test_cholesky_indefinite_reports_pivot():
    with pytest.raises(NotPositiveDefinite) as info:
        linalg.cholesky_upper(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.index == 1


def test_cholesky_rejects_asymmetric():
    with pytest.raises(NonSymmetric):
        linalg.cholesky_upper(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_cholesky_large_reconstruction():
    x = random_spd(np.random.default_rng(0), 500, cond=1e4)
    r = linalg.cholesky_upper(x)
    assert np.linalg.norm(r.T @ r - x) / np.linalg.norm(x) <= 1e-12
    assert np.all(np.diag(r) > 0)


@given(spd_matrices())
def test_cholesky_property(x):
    r = linalg.cholesky_upper(x)
    assert np.allclose(np.tril(r, -1), 0)
    assert np.linalg.norm(r.T @ r - x) <= 1e-12 * np.linalg.norm(x)


# ---------------------------------------------------------------- sqrt and eig


def test_spd_sqrt_examples():
    np.testing.assert_array_equal(linalg.spd_sqrt(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(linalg.spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-15)


def test_spd_sqrt_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        linalg.spd_sqrt(np.diag([1.0, -1.0]))


@given(spd_matrices())
def test_spd_sqrt_property(x):
    s = linalg.spd_sqrt(x)
    scale = np.linalg.norm(x)
    assert np.allclose(s, s.T, atol=0)
    assert np.linalg.norm(s @ s - x) <= 1e-11 * scale
    assert np.linalg.norm(s @ x - x @ s) <= 1e-11 * scale**1.5
    assert np.min(np.linalg.eigvalsh(s)) > 0


@given(spd_matrices())
def test_inverse_helpers_agree(x):
    inv = linalg.spd_inv(x)
    isq = linalg.spd_inv_sqrt(x)
    cond = np.linalg.cond(x)
    assert np.linalg.norm(inv @ x - np.eye(len(x))) <= 1e-12 * cond
    assert np.linalg.norm(isq @ isq - inv) <= 1e-12 * cond * np.linalg.norm(inv)


def test_sym_eig_examples():
    lam, y = linalg.sym_eig(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(lam, [1, 2, 3])
    np.testing.assert_allclose(np.abs(y), np.eye(3))
    lam, y = linalg.sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(lam, [-1, 1])
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(y), [[r, r], [r, r]])
    assert y[0, 0] * y[1, 0] < 0 < y[0, 1] * y[1, 1]


def test_sym_eig_random_symmetric():
    g = np.random.default_rng(1).standard_normal((40, 40))
    x = g + g.T
    lam, y = linalg.sym_eig(x)
    assert np.all(np.diff(lam) >= 0)
    assert np.linalg.norm((y * lam) @ y.T - x) <= 1e-11 * np.linalg.norm(x)
    assert np.linalg.norm(y.T @ y - np.eye(40)) <= 1e-12 * 40


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(NonSymmetric):
        linalg.sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_symmetrize_shape_and_finiteness():
    with pytest.raises(ShapeMismatch):
        linalg.symmetrize(np.ones((2, 3)))
    with pytest.raises(DomainError):
        linalg.symmetrize(np.array([[np.nan]]))


# ---------------------------------------------------------------- spectral functions


def test_apply_spectral_fn_identity_and_time_zero():
    x = random_spd(np.random.default_rng(2), 6)
    v = np.arange(6.0)
    np.testing.assert_allclose(linalg.apply_spectral_fn(x, lambda t: t, v), x @ v, rtol=1e-12)
    np.testing.assert_allclose(linalg.apply_spectral_fn(x, lambda t: np.cos(0 * np.sqrt(t)), v), v, atol=1e-12)


def test_apply_spectral_fn_scalar_cosine():
    out = linalg.apply_spectral_fn(np.array([[np.pi**2 / 4]]), lambda t: np.cos(np.sqrt(t)), np.array([1.0]))
    assert abs(out[0] - oracles.QUARTER_COSINE) < 1e-15


def test_apply_spectral_fn_domain_error():
    with pytest.raises(DomainError):
        linalg.apply_spectral_fn(np.diag([-1.0, 1.0]), np.log, np.ones(2))


@given(spd_matrices(max_n=6), st.integers(0, 3))
def test_apply_spectral_fn_polynomial_exact(x, power):
    v = np.ones(len(x))
    expected = np.linalg.matrix_power(x, power) @ v
    got = linalg.apply_spectral_fn(x, lambda t: t**power, v)
    assert np.linalg.norm(got - expected) <= 1e-10 * max(1.0, np.linalg.norm(expected))


# ---------------------------------------------------------------- polar


def test_polar_examples():
    s, q = linalg.polar_left(np.eye(2))
    np.testing.assert_allclose(s, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(q, np.eye(2), atol=1e-15)
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    s, q = linalg.polar_left(swap)
    np.testing.assert_allclose(s, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(q, swap, atol=1e-15)


@pytest.mark.parametrize("a", [3.0, -2.5])
def test_polar_scalar(a):
    s, q = linalg.polar_left(np.array([[a]]))
    assert s[0, 0] == pytest.approx(abs(a))
    assert q[0, 0] == pytest.approx(np.sign(a))


def test_polar_singular():
    with pytest.raises(Singular):
        linalg.polar_left(np.array([[1.0, 1.0], [1.0, 1.0]]))


@given(arrays(float, (4, 4), elements=finite))
def test_polar_property(mat):
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] < 1e-3 * max(sv[0], 1e-300) or sv[0] == 0:
        return
    s, q = linalg.polar_left(mat)
    norm = np.linalg.norm(mat)
    assert np.linalg.norm(q @ q.T - np.eye(4)) <= 1e-11
    assert np.linalg.norm(s @ q - mat) <= 1e-11 * norm
    assert np.linalg.norm(s @ s - mat @ mat.T) <= 1e-11 * norm**2
    assert np.min(np.linalg.eigvalsh(s)) > 0


# ---------------------------------------------------------------- block matrix


def test_block_matrix_blocks_and_band():
    b = BlockMatrix.zeros(3, 2)
    b.set_block(0, 2, np.full((2, 2), 5.0))
    b.set_block(1, 1, np.eye(2))
    assert b.n == 3 and b.m == 2
    assert b.band_mass(1) == 5.0
    b.zero_outside_band(1)
    assert b.band_mass(1) == 0.0
    np.testing.assert_array_equal(b.block(1, 1), np.eye(2))
    np.testing.assert_array_equal(b.T.data, b.data.T)


def test_block_matrix_rejects_bad_shape():
    with pytest.raises(ShapeMismatch):
        BlockMatrix(np.zeros((5, 5)), 2)
