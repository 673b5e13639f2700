import mpmath
import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

from asymlab.errors import PreconditionError, WindowMismatchError
from asymlab.linalg import FourierVector, IndexWindow, spectral_norm
from asymlab.probe import cesaro_gram_limit, classify_c_class
from asymlab.weighted_shift import (
    Weight,
    block_gram_components,
    embedding_Y,
    eigenvector_residual_grid,
    invertibility_index,
    inverse_compression_eigenvector,
    nested_embedding_J,
    quasianalytic_classifier,
    quasianalytic_partial_sums,
    unweighted_shift,
    weighted_shift,
)

tables = st.lists(st.floats(0.0, 0.7), min_size=4, max_size=30).map(lambda d: np.exp(np.cumsum(d)).tolist())


def test_weight_values_and_log_form():
    w = Weight.exponential(1.0, 5)
    assert w.omega(np.array([-3, 0, 4])) == pytest.approx([np.e**3, 1, 1])
    s = Weight.stretched(0.5, 10000)
    assert s.log_omega(np.array([-10000]))[0] == pytest.approx(100.0)
    assert Weight.exponential(1.0, 10000).log_omega(np.array([-10000]))[0] == 10000.0
    assert s.unbounded_trend and not Weight.trivial(5).unbounded_trend


def test_weight_rejections_name_the_index():
    with pytest.raises(PreconditionError, match="n = -3"):
        Weight.from_table([1.0, 2.0, 1.5, 3.0])
    with pytest.raises(PreconditionError):
        Weight.from_table([1.0, 2.0], M=5)
    with pytest.raises(PreconditionError):
        Weight.stretched(1.5, 4)
    with pytest.raises(PreconditionError):
        Weight("gaussian", IndexWindow.symmetric(3))
    with pytest.raises(WindowMismatchError):
        Weight("exponential", IndexWindow(0, 3))


@settings(max_examples=30, deadline=None)
@given(tables)
def test_shift_is_a_contraction_with_diagonal_intertwining(values):
    w = Weight.from_table(values)
    S = weighted_shift(w)
    assert spectral_norm(S) <= 1 + 1e-12
    Y = embedding_Y(w)
    U = unweighted_shift(w.window)
    assert np.max(np.abs((Y @ S).entries - (U @ Y).entries)) < 1e-10
    ratios = np.diag(S.entries, k=-1).real
    idx = w.window.indices
    assert np.allclose(ratios, w.omega(idx[1:]) / w.omega(idx[:-1]), rtol=1e-12)


def test_nested_embedding():
    w0, w = Weight.exponential(1.0, 20), Weight.stretched(0.5, 20)
    J = nested_embedding_J(w0, w)
    assert np.max(np.abs((embedding_Y(w) @ J).entries - embedding_Y(w0).entries)) < 1e-10
    assert spectral_norm(J) <= 1 + 1e-12
    with pytest.raises(PreconditionError, match="n = -"):
        nested_embedding_J(w, w0)
    with pytest.raises(WindowMismatchError):
        nested_embedding_J(w0, Weight.stretched(0.5, 21))


def test_invertibility_index():
    assert invertibility_index(Weight.exponential(2.0, 4)) == pytest.approx(np.e**2)
    assert invertibility_index(Weight.trivial(4)) == 1


def test_harmonic_partial_sums():
    S = quasianalytic_partial_sums(Weight.exponential(1.0, 10), 10000)
    for N in (10, 100, 1000, 10000):
        assert abs(S[N - 1] - float(mpmath.harmonic(N))) < 1e-9
        assert abs(S[N - 1] - (scipy.special.digamma(N + 1) + np.euler_gamma)) < 1e-9


def test_classifier_dichotomy():
    q = quasianalytic_classifier(Weight.exponential(1.0, 10))
    assert q.verdict == "quasianalytic-trend" and abs(q.growth_slope) < 0.05
    r = quasianalytic_classifier(Weight.stretched(0.5, 10))
    assert r.verdict == "regular-trend" and r.growth_slope == pytest.approx(-0.5, abs=0.05)
    # tail estimate against the Hurwitz zeta remainder of sum n^{-3/2}
    true_tail = float(mpmath.zeta(1.5, 10001))
    assert r.tail_estimate == pytest.approx(true_tail, rel=0.15)
    assert quasianalytic_classifier(Weight.trivial(10)).verdict == "regular-trend"
    with pytest.raises(PreconditionError):
        quasianalytic_classifier(Weight.trivial(10), [10, 5, 100])


def _oracle_residual(w, zeta):
    """Restricted inverse built from the shift matrix itself, adjoint applied to the eigenvector."""
    S = weighted_shift(w).entries
    M = -w.window.lo
    neg = [w.window.position(n) for n in range(-M, 1)]
    r = np.diag(S, k=-1)
    Sinv = np.zeros_like(S)
    Sinv[np.arange(S.shape[0] - 1), np.arange(1, S.shape[0])] = 1 / r
    A = Sinv[np.ix_(neg, neg)]
    f, _ = inverse_compression_eigenvector(w, zeta)
    a = f.orthonormalized().coeffs[neg]
    return np.linalg.norm(A.conj().T @ a - zeta * a), f


@pytest.mark.parametrize("w", [Weight.exponential(1.0, 64), Weight.stretched(0.5, 96), Weight.stretched(0.5, 16)])
@pytest.mark.parametrize("zeta", [0.5, 0.3 - 0.6j, -0.75j])
def test_eigenvector_against_matrix_oracle(w, zeta):
    ref, f = _oracle_residual(w, zeta)
    _, res = inverse_compression_eigenvector(w, zeta)
    assert res == pytest.approx(ref, rel=1e-9, abs=1e-15)
    # on a short window the residual is the edge term alone
    M = -w.window.lo
    edge = abs(zeta) ** (M + 1) * np.exp(-w.log_negative(np.array([M]))[0])
    assert res == pytest.approx(edge, rel=1e-9, abs=1e-15)
    assert f[0] == 1
    assert f[-2] == pytest.approx(zeta**2 / w.omega(np.array([-2]))[0] ** 2)
    assert f[1] == 0


def test_eigenvector_residual_shrinks_with_window():
    w = Weight.stretched(0.5, 64)
    r = [inverse_compression_eigenvector(w, 0.8, M)[1] for M in (64, 128, 256)]
    assert r[0] > r[1] > r[2]
    grid = eigenvector_residual_grid(w)
    assert grid[:, 2].max() < 1e-6
    with pytest.raises(PreconditionError):
        inverse_compression_eigenvector(w, 1.5)


def test_forward_orbits_match_y_pushforward():
    w = Weight.stretched(0.5, 96)
    win = w.window
    probes = [FourierVector.unit(win, n) for n in (-8, -3, 0)]
    probes.append(FourierVector.from_dict(win, {-5: 1.0, -1: 2j, 2: 0.5}))
    rep = cesaro_gram_limit(weighted_shift(w), probes, max_power=64)
    Y = embedding_Y(w).entries
    P = np.column_stack([p.coeffs for p in probes])
    ref = (Y @ P).T @ (Y @ P).conj()
    assert np.max(np.abs(rep.gram - ref)) < 1e-6


@pytest.mark.parametrize("w", [Weight.exponential(1.0, 96), Weight.stretched(0.5, 96)])
def test_c10_pattern(w):
    probes = [FourierVector.unit(w.window, n) for n in (-4, 0, 4)]
    assert classify_c_class(weighted_shift(w), probes, n_max=48).pattern == "C10"


def test_block_gram_components():
    M = 96
    w0, w = Weight.exponential(1.0, M), Weight.stretched(0.5, M)
    probes = [FourierVector.unit(w0.window, n) for n in (-3, 0, 2)]
    rep = block_gram_components(w0, w, 0.5, probes)
    assert rep.component_a_residual < 1e-6
    assert rep.component_b_residual < 1e-6
    assert rep.x0_smallest_singular == pytest.approx(0.5)
    assert rep.verdicts == ("quasianalytic-trend", "regular-trend")
    with pytest.raises(PreconditionError):
        block_gram_components(w, w0, 0.5, probes)
    with pytest.raises(PreconditionError):
        block_gram_components(w0, w, 1.5, probes)
