import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asymlab.eigenbasis import (
    EigenSystemSpec,
    abel_bound,
    binomial_series,
    canonical_map,
    closed_form_system,
    coordinate_unitary,
    default_noest_sequences,
    diagonal_operator,
    direct_sum,
    direct_sum_family,
    dual_doubling_drift,
    dual_family,
    example_noest_system,
    helson_szego_family,
    intertwiner_bound,
    partial_sum_norms,
    partial_sum_projections,
    scaled_intertwiner,
    skew_projections,
)
from asymlab.errors import ConstraintError, PreconditionError, RankDeficientError
from asymlab.linalg import FourierVector, IndexWindow, MatrixOperator, singular_values, spectral_norm
from asymlab.probe import asymptote_verdict, check_delta_qn_product, riesz_bounds


def random_family(seed, n=8, extra=4, perturb=0.3):
    g = np.random.default_rng(seed)
    B = np.eye(n + extra, n) + perturb * (g.standard_normal((n + extra, n)) + 1j * g.standard_normal((n + extra, n)))
    w = IndexWindow.hardy(n + extra - 1)
    return [FourierVector(w, B[:, k]) for k in range(n)]


# -- binomial coefficients, two independent oracles


@pytest.mark.parametrize("alpha", [-0.25, 0.25, 0.4])
def test_binomial_series_matches_mpmath(alpha):
    c = binomial_series(alpha, 60)
    ref = [float((-1) ** k * mpmath.binomial(alpha, k)) for k in range(61)]
    assert np.max(np.abs(c - ref)) < 1e-14


@pytest.mark.parametrize("alpha", [-0.25, 0.25])
def test_binomial_series_matches_fft(alpha):
    # coefficients from samples of (1 - z)^alpha on |z| = r inside the disk
    r, m, K = 0.9, 2**12, 40
    z = r * np.exp(2j * np.pi * np.arange(m) / m)
    ref = np.fft.fft((1 - z) ** alpha)[: K + 1].real / m / r ** np.arange(K + 1)
    assert np.max(np.abs(binomial_series(alpha, K) - ref)) < 1e-10


def test_hs_gram_against_gamma_closed_form():
    # (x_0, x_0) = int |1 - z|^{2 alpha} dm = Gamma(1 + 2 alpha) / Gamma(1 + alpha)^2
    alpha = 0.25
    x0 = helson_szego_family(alpha, 4, D=20000)[0]
    ref = float(mpmath.gamma(1 + 2 * alpha) / mpmath.gamma(1 + alpha) ** 2)
    assert x0.norm() ** 2 == pytest.approx(ref, abs=1e-5)
    # off-diagonal Toeplitz entry k = 1: Gamma(1+2a) (-1) / (Gamma(a+2) Gamma(a))
    x1 = helson_szego_family(alpha, 4, D=20000)[1]
    g1 = np.vdot(x0.coeffs, x1.coeffs)  # (x1, x0)
    ref1 = float(-mpmath.gamma(1 + 2 * alpha) / (mpmath.gamma(alpha + 2) * mpmath.gamma(alpha)))
    assert g1.real == pytest.approx(ref1, abs=1e-5)


def test_hs_family_preconditions():
    with pytest.raises(PreconditionError):
        helson_szego_family(0.5, 8)
    with pytest.raises(PreconditionError):
        helson_szego_family(0.0, 8)
    with pytest.raises(PreconditionError):
        helson_szego_family(0.25, 8, D=10)
    fam = helson_szego_family(-0.25, 8)
    assert fam[0].window == IndexWindow.hardy(2 * 8 + 64)
    assert fam[3][3] == 1 and fam[3][2] == 0


# -- biorthogonal systems


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dual_family_algebra(seed):
    sys = dual_family(random_family(seed))
    assert sys.biorthogonality_residual < 1e-10
    Q = [q.entries for q in skew_projections(sys)]
    for n, Qn in enumerate(Q):
        assert np.max(np.abs(Qn @ Qn - Qn)) < 1e-10
        for k in range(n):
            assert np.max(np.abs(Qn @ Q[k])) < 1e-10
    P = [p.entries for p, _ in partial_sum_projections(sys)]
    for n in range(len(P)):
        for m in range(len(P)):
            assert np.max(np.abs(P[n] @ P[m] - P[min(n, m)])) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_sum_norms_match_dense(seed):
    sys = dual_family(random_family(seed, perturb=0.6))
    dense = np.array([nrm for _, nrm in partial_sum_projections(sys)])
    assert np.allclose(partial_sum_norms(sys), dense, rtol=1e-9)


def test_dual_family_rejects_dependence():
    w = IndexWindow.hardy(3)
    x = FourierVector(w, np.array([1.0, 2, 0, 0]))
    with pytest.raises(RankDeficientError):
        dual_family([x, x * 3.0])
    with pytest.raises(RankDeficientError):
        dual_family([FourierVector.unit(IndexWindow.hardy(0), 0)] * 2)


def test_dual_family_for_weighted_primal():
    from asymlab.weighted_shift import Weight

    wt = Weight.exponential(0.3, 3)
    g = np.random.default_rng(1)
    fam = [FourierVector(wt.window, np.eye(7)[:, k] + 0.2 * g.standard_normal(7), wt) for k in range(5)]
    sys = dual_family(fam)
    from asymlab.linalg import weighted_inner

    pair = np.array([[weighted_inner(x, xd) for xd in sys.dual] for x in sys.primal])
    assert np.max(np.abs(pair - np.eye(5))) < 1e-10


def test_prop_canonical_map_inverts_coordinates():
    sys = dual_family(random_family(5))
    X = canonical_map(sys)
    assert np.max(np.abs(X.entries @ sys.B - np.eye(len(sys)))) < 1e-10
    # on the span, the singular values of X are the reciprocals of those of B
    s_b = singular_values(sys.B)
    s_x = singular_values(X)
    assert np.allclose(np.sort(s_x), np.sort(1 / s_b), rtol=1e-9)


def test_scaled_intertwiner_and_bound():
    sys = dual_family(random_family(9))
    a = np.linspace(1.0, 0.2, len(sys))
    X = scaled_intertwiner(sys, a)
    assert np.max(np.abs(X.entries @ sys.B - np.diag(a))) < 1e-10
    assert spectral_norm(X) <= intertwiner_bound(sys, a) + 1e-12
    with pytest.raises(PreconditionError):
        scaled_intertwiner(sys, -a)


# -- diagonal operators


def test_eigen_identities_and_abel_bound():
    fam = helson_szego_family(-0.25, 16)
    sys = dual_family(fam)
    spec = EigenSystemSpec.default_angles(16)
    T = diagonal_operator(spec, sys)
    for x, lam in zip(sys.primal, spec.eigenvalues):
        assert np.linalg.norm(T.entries @ x.coeffs - lam * x.coeffs) < 1e-10
    p = partial_sum_norms(sys)
    assert spectral_norm(T) <= abel_bound(spec, p) + 1e-9
    assert abel_bound(spec, p) <= (2 * np.pi + 1) * p.max() + 1e-12


def test_intertwining_with_coordinate_unitary():
    sys = dual_family(random_family(11))
    spec = EigenSystemSpec.default_angles(len(sys))
    T = diagonal_operator(spec, sys)
    X = canonical_map(sys)
    U = coordinate_unitary(spec.eigenvalues)
    assert np.max(np.abs((X @ T).entries - (U @ X).entries)) < 1e-10


def test_spec_checks():
    with pytest.raises(PreconditionError):
        EigenSystemSpec(np.array([1.0, 1.0]))
    assert EigenSystemSpec(np.array([1.0, 2.0])).monotone_violation() == 1
    assert EigenSystemSpec.default_angles(5).monotone_violation() is None
    sys = dual_family(random_family(2, n=3))
    with pytest.raises(PreconditionError):
        diagonal_operator(EigenSystemSpec(np.array([1.0, 2.0, 3.0])), sys)
    with pytest.raises(PreconditionError):
        diagonal_operator(EigenSystemSpec.default_angles(2), sys)


# -- two-by-two block example


def test_noest_closed_forms():
    ex = example_noest_system(N=64)
    sys, T, X, Xs = ex
    assert sys.biorthogonality_residual == 0
    q = np.array([spectral_norm(Q) for Q in skew_projections(sys)])
    c = ex.c
    assert np.max(np.abs(q[0::2] - np.sqrt(1 + c**2))) < 1e-10
    assert np.max(np.abs(q[1::2] - np.sqrt(1 + c**2))) < 1e-10
    assert ex.off_diagonal_norm() <= ex.coupling_sup + 1e-8
    lam = ex.spec.eigenvalues
    for x, l in zip(sys.primal, lam):
        assert np.linalg.norm(T.entries @ x.coeffs - l * x.coeffs) < 1e-10
    U = coordinate_unitary(lam)
    assert np.max(np.abs((X @ T).entries - (U @ X).entries)) < 1e-10
    # X* intertwines the adjoint: X* T^H = U^H X*
    assert np.max(np.abs(Xs.entries @ T.entries.conj().T - U.entries.conj().T @ Xs.entries)) < 1e-10
    # delta_n ||Q_n|| stays at one with the canonical scaling
    assert np.allclose(check_delta_qn_product(X, sys), 1.0)


def test_noest_default_schedule():
    c, angles = default_noest_sequences(4)
    assert np.allclose(c, np.sqrt([1, 2, 3, 4]))
    assert angles[1] == pytest.approx(np.pi) and angles[0] == pytest.approx(np.pi + 1)


def test_noest_rejects_bad_sequences():
    with pytest.raises(ConstraintError):
        example_noest_system(c_seq=np.linspace(2, 1, 8), N=8)
    with pytest.raises(ConstraintError):
        example_noest_system(c_seq=np.arange(1, 9) ** 3.0, N=8, coupling_cap=5.0)
    with pytest.raises(PreconditionError):
        example_noest_system(c_seq=[1.0, 2.0], N=8)


# -- power-weight dichotomy and direct sums


def test_delta_qn_product_decays_for_positive_exponent():
    mins = []
    for N in (16, 32, 64, 128):
        sys = dual_family(helson_szego_family(0.25, N))
        X = canonical_map(sys)
        X = MatrixOperator(X.domain, X.codomain, X.entries / spectral_norm(X))
        mins.append(min(check_delta_qn_product(X, sys)))
    assert all(b < a for a, b in zip(mins, mins[1:]))
    assert mins[-1] < 0.6 * mins[0]


def test_direct_sum_inherits_the_decaying_side():
    ladder = []
    for N in (16, 32, 64):
        f = helson_szego_family(-0.25, N)
        g = helson_szego_family(0.25, N)
        fam = direct_sum_family(f, g)
        lo = riesz_bounds(fam)[0]
        assert lo == pytest.approx(min(riesz_bounds(f)[0], riesz_bounds(g)[0]), rel=1e-10)
        ladder.append((N, fam))
    assert asymptote_verdict(ladder).kind == "lower-bound-decays"


def test_direct_sum_of_operators():
    a = MatrixOperator.identity(IndexWindow.hardy(1))
    b = MatrixOperator.square(IndexWindow.hardy(2), 2 * np.eye(3))
    s = direct_sum(a, b)
    assert s.shape == (5, 5) and spectral_norm(s) == 2


def test_closed_form_system_reports_residual():
    w = IndexWindow.hardy(1)
    e0, e1 = FourierVector.unit(w, 0), FourierVector.unit(w, 1)
    sys = closed_form_system([e0, e1], [e0, e0 + e1 * 1e-3])
    assert sys.biorthogonality_residual == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", [-0.25, 0.25])
def test_truncation_duals_settle_as_the_window_grows(alpha):
    drift = [dual_doubling_drift(alpha, 32, D) for D in (128, 256, 512)]
    assert all(b < a for a, b in zip(drift, drift[1:]))
    assert drift[-1] < 0.5 * drift[0]
