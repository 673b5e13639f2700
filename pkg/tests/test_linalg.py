import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from asymlab.errors import NonFiniteError, WindowMismatchError
from asymlab.linalg import (
    DENSE_LIMIT,
    FourierVector,
    IndexWindow,
    MatrixOperator,
    column_matrix,
    numerical_rank,
    rank_one,
    smallest_singular_value,
    spectral_norm,
    weighted_inner,
)
from asymlab.weighted_shift import Weight

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_arrays(n):
    return st.tuples(hnp.arrays(float, n, elements=finite), hnp.arrays(float, n, elements=finite)).map(
        lambda t: t[0] + 1j * t[1]
    )


def test_window_basics():
    w = IndexWindow(-3, 4)
    assert w.size == 8
    assert list(w.indices) == list(range(-3, 5))
    assert w.position(-3) == 0 and w.position(4) == 7
    assert 0 in w and 5 not in w
    with pytest.raises(ValueError):
        IndexWindow(2, 1)


def test_vector_rejects_bad_input():
    w = IndexWindow.hardy(3)
    with pytest.raises(WindowMismatchError):
        FourierVector(w, np.ones(3))
    with pytest.raises(NonFiniteError):
        FourierVector(w, np.array([1, np.nan, 0, 0]))
    f = FourierVector(w, np.ones(4))
    g = FourierVector(IndexWindow.hardy(4), np.ones(5))
    with pytest.raises(WindowMismatchError):
        weighted_inner(f, g)
    with pytest.raises(WindowMismatchError):
        f + g


def test_weighted_inner_uses_omega_squared():
    wt = Weight.exponential(1.0, 3)
    f = FourierVector.from_dict(wt.window, {-2: 1.0, 1: 2.0}, wt)
    assert weighted_inner(f, f) == pytest.approx(np.exp(4) + 4)
    # orthonormal coordinates carry omega once
    assert f.orthonormalized()[-2] == pytest.approx(np.e**2)


@given(complex_arrays(6), complex_arrays(6))
def test_inner_hermitian(a, b):
    w = IndexWindow(-2, 3)
    f, g = FourierVector(w, a), FourierVector(w, b)
    assert weighted_inner(f, g) == pytest.approx(np.conj(weighted_inner(g, f)), abs=1e-9)
    assert weighted_inner(f, f).real >= 0


@given(complex_arrays(5), complex_arrays(4))
def test_rank_one_norm_is_product_of_norms(a, b):
    x = FourierVector(IndexWindow.hardy(4), a)
    y = FourierVector(IndexWindow(-1, 2), b)
    Q = rank_one(x, y)
    assert Q.domain == y.window and Q.codomain == x.window
    assert spectral_norm(Q) == pytest.approx(x.norm() * y.norm(), rel=1e-9, abs=1e-9)
    assert numerical_rank(Q) <= 1


def test_operator_composition_checks_windows():
    a, b = IndexWindow.hardy(2), IndexWindow.hardy(3)
    A = MatrixOperator(a, b, np.ones((4, 3)))
    B = MatrixOperator(b, a, np.ones((3, 4)))
    assert (B @ A).shape == (3, 3)
    with pytest.raises(WindowMismatchError):
        A @ A
    with pytest.raises(WindowMismatchError):
        MatrixOperator(a, b, np.ones((3, 3)))
    with pytest.raises(WindowMismatchError):
        A @ FourierVector(b, np.ones(4))
    assert A.H.domain == b


def test_operator_entries_are_frozen():
    A = MatrixOperator.identity(IndexWindow.hardy(2))
    with pytest.raises(ValueError):
        A.entries[0, 0] = 3


def test_block_uses_window_indices():
    w = IndexWindow(-2, 2)
    A = MatrixOperator.square(w, np.arange(25.0).reshape(5, 5))
    assert A.block([-2], [2])[0, 0] == 4


def test_column_matrix_is_orthonormal_coordinates():
    wt = Weight.exponential(0.5, 2)
    fam = [FourierVector.unit(wt.window, n, wt) for n in wt.window.indices]
    B = column_matrix(fam)
    assert np.allclose(np.abs(np.diag(B)), wt.omega(wt.window.indices))


@pytest.mark.parametrize("shape", [(40, 30), (30, 40), (DENSE_LIMIT + 40, 60)])
def test_norms_match_dense_svd(shape, rng):
    A = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    s = np.linalg.svd(A, compute_uv=False)
    assert spectral_norm(A, tol=1e-12) == pytest.approx(s[0], rel=1e-8)
    assert smallest_singular_value(A, tol=1e-12) == pytest.approx(s[-1], rel=1e-8)


def test_iterative_path_on_large_matrix(rng):
    n = DENSE_LIMIT + 100
    d = np.concatenate([[3.0], np.linspace(0.8, 2.0, n - 2), [0.5]])
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ np.diag(d) @ Q.T
    assert spectral_norm(A, tol=1e-12) == pytest.approx(3.0, rel=1e-6)
    assert smallest_singular_value(A, tol=1e-12) == pytest.approx(0.5, rel=1e-6)


def test_nonfinite_matrix_raises():
    with pytest.raises(NonFiniteError):
        spectral_norm(np.array([[np.inf]]))
    with pytest.raises(ValueError):
        spectral_norm(np.eye(2), tol=0)


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_numerical_rank_of_products(r, seed):
    g = np.random.default_rng(seed)
    A = g.standard_normal((12, r)) @ g.standard_normal((r, 9))
    assert numerical_rank(A, rtol=1e-9) == r
