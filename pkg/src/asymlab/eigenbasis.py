"""Biorthogonal systems, skew projections and operators diagonal in a non-orthogonal basis.

Families are stored as ``FourierVector`` lists sharing one window.  Dual
families are computed on the span of the truncated primal family, so they are
the truncation duals, not the infinite-dimensional ones; the reported
residuals measure how far the pairing is from exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import tolerances
from .errors import ConstraintError, PreconditionError, RankDeficientError
from .linalg import FourierVector, IndexWindow, MatrixOperator, column_matrix, rank_one, spectral_norm

TWO_PI = 2 * np.pi
MAX_CONDITION = 1e12


@dataclass(eq=False)
class BiorthogonalSystem:
    primal: list[FourierVector]
    dual: list[FourierVector]
    biorthogonality_residual: float
    condition_number: float = float("nan")

    def __post_init__(self):
        if len(self.primal) != len(self.dual):
            raise ValueError("primal and dual families differ in length")
        for f in (*self.primal, *self.dual):
            if not np.any(f.coeffs):
                raise ValueError("biorthogonal families cannot contain the zero vector")

    def __len__(self) -> int:
        return len(self.primal)

    @property
    def window(self) -> IndexWindow:
        return self.primal[0].window

    @property
    def B(self) -> np.ndarray:
        return column_matrix(self.primal)

    @property
    def B_dual(self) -> np.ndarray:
        return column_matrix(self.dual)

    def pairing(self) -> np.ndarray:
        """Matrix of (x'_n, x_k) indexed [k, n]."""
        return self.B.conj().T @ self.B_dual


@dataclass
class EigenSystemSpec:
    """Eigenvalues lambda_n = exp(i t_n) stored through their angles."""

    angles: np.ndarray
    family_kind: str = "explicit"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        lam = self.eigenvalues
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(lam.size)
        if lam.size > 1 and gaps.min() < 1e-12:
            i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            raise PreconditionError(f"eigenvalues {i} and {j} coincide", first=int(i), second=int(j))

    @classmethod
    def default_angles(cls, N: int, **kw) -> EigenSystemSpec:
        return cls(TWO_PI / (np.arange(N) + 1.0), **kw)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def monotone_violation(self) -> int | None:
        """First index where 0 < ... < t_{n+1} < t_n <= 2 pi fails, else None."""
        t = self.angles
        if t.size and (t[0] > TWO_PI or t[-1] <= 0):
            return 0 if t[0] > TWO_PI else t.size - 1
        bad = np.nonzero(np.diff(t) >= 0)[0]
        return int(bad[0]) + 1 if bad.size else None


def _family_from_matrix(window: IndexWindow, M: np.ndarray) -> list[FourierVector]:
    return [FourierVector(window, M[:, k]) for k in range(M.shape[1])]


def dual_family(primal: Sequence[FourierVector]) -> BiorthogonalSystem:
    """Dual family B' = B (B^H B)^{-1}, computed through a QR factorization of B."""
    primal = list(primal)
    B = column_matrix(primal)
    Q, R = scipy.linalg.qr(B, mode="economic")
    s = scipy.linalg.svdvals(R)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    if B.shape[0] < B.shape[1] or cond > MAX_CONDITION:
        raise RankDeficientError(
            f"primal family is numerically dependent (condition number {cond:.3e})", condition_number=cond
        )
    Bd = Q @ scipy.linalg.solve_triangular(R, np.eye(R.shape[0]), trans="C", lower=False)
    window = primal[0].window
    residual = float(np.max(np.abs(B.conj().T @ Bd - np.eye(B.shape[1]))))
    # primal vectors may carry a weight; duals are returned in the same coordinates
    dual = _family_from_matrix(window, Bd)
    if primal[0].weight is not None:
        w = primal[0].weights()
        dual = [FourierVector(window, d.coeffs / w, primal[0].weight) for d in dual]
    return BiorthogonalSystem(primal, dual, residual, cond)


def closed_form_system(primal: Sequence[FourierVector], dual: Sequence[FourierVector]) -> BiorthogonalSystem:
    primal, dual = list(primal), list(dual)
    B, Bd = column_matrix(primal), column_matrix(dual)
    residual = float(np.max(np.abs(B.conj().T @ Bd - np.eye(len(primal)))))
    return BiorthogonalSystem(primal, dual, residual)


def skew_projections(system: BiorthogonalSystem) -> list[MatrixOperator]:
    """Q_n = x_n (x) x'_n."""
    return [rank_one(x, xd) for x, xd in zip(system.primal, system.dual)]


def partial_sum_projections(system: BiorthogonalSystem) -> list[tuple[MatrixOperator, float]]:
    """P_n = Q_0 + ... + Q_n with their spectral norms (dense; use for small systems)."""
    B, Bd = system.B, system.B_dual
    w = system.window
    out = []
    for n in range(len(system)):
        P = B[:, : n + 1] @ Bd[:, : n + 1].conj().T
        out.append((MatrixOperator(w, w, P), spectral_norm(P)))
    return out


def partial_sum_norms(system: BiorthogonalSystem) -> np.ndarray:
    """||P_n|| for every n without forming P_n.

    The nonzero spectrum of P_n^H P_n equals that of G_n G'_n, where G_n and
    G'_n are the leading n+1 sections of the primal and dual Gram matrices.
    """
    B, Bd = system.B, system.B_dual
    G = B.conj().T @ B
    Gd = Bd.conj().T @ Bd
    norms = np.empty(len(system))
    for n in range(len(system)):
        L = np.linalg.cholesky(G[: n + 1, : n + 1])
        M = L.conj().T @ Gd[: n + 1, : n + 1] @ L
        norms[n] = np.sqrt(max(np.linalg.eigvalsh(M)[-1], 0.0))
    return norms


def diagonal_operator(
    spec: EigenSystemSpec, system: BiorthogonalSystem, require_monotone: bool = True
) -> MatrixOperator:
    """T = sum lambda_n Q_n, so that T x_n = lambda_n x_n on the truncation."""
    N = len(system)
    if spec.angles.size < N:
        raise PreconditionError(f"{spec.angles.size} eigenvalues for a family of {N}", needed=N)
    if require_monotone:
        bad = spec.monotone_violation()
        if bad is not None:
            raise PreconditionError("angles must satisfy 0 < t_{n+1} < t_n <= 2 pi", index=bad)
    lam = spec.eigenvalues[:N]
    B, Bd = system.B, system.B_dual
    w = system.window
    return MatrixOperator(w, w, (B * lam) @ Bd.conj().T)


def abel_bound(spec: EigenSystemSpec, p_norms: Sequence[float]) -> float:
    """(sum |lambda_k - lambda_{k+1}| + |lambda_N|) sup ||P_n||, never above (2 pi + 1) sup ||P_n||."""
    lam = spec.eigenvalues[: len(p_norms)]
    return float((np.sum(np.abs(np.diff(lam))) + 1.0) * np.max(p_norms))


def binomial_series(alpha: float, D: int) -> np.ndarray:
    """Taylor coefficients of (1 - z)^alpha up to z^D."""
    if D < 0:
        raise ValueError("D must be nonnegative")
    c = np.empty(D + 1)
    c[0] = 1.0
    for k in range(D):
        c[k + 1] = c[k] * (k - alpha) / (k + 1)
    return c


def helson_szego_family(alpha: float, N: int, D: int | None = None) -> list[FourierVector]:
    """x_n = chi^n p, n < N, with p the Taylor polynomial of (1 - z)^alpha of degree D - N + 1.

    Every member is an exact shift of the same polynomial, so all x_n have the
    same norm and the Gram matrix is exactly Toeplitz.  Default D = 2N + 64.
    """
    if not (-0.5 < alpha < 0.5) or alpha == 0:
        raise PreconditionError("alpha must lie in (-1/2, 0) or (0, 1/2)", alpha=alpha)
    if N < 4:
        raise PreconditionError("N must be at least 4", N=N)
    D = 2 * N + 64 if D is None else D
    if D < 2 * N:
        raise PreconditionError("need D >= 2N", D=D, N=N)
    L = D - N + 1
    psi = binomial_series(alpha, L)
    window = IndexWindow.hardy(D)
    family = []
    for n in range(N):
        c = np.zeros(D + 1)
        c[n : n + L + 1] = psi
        family.append(FourierVector(window, c))
    return family


def dual_doubling_drift(alpha: float, N: int, D: int | None = None) -> float:
    """Largest entry change of the truncation duals when the window doubles from D to 2D.

    Entries are compared on the common indices 0..D; the duals beyond D at the
    larger window count in full.  Small drift means the truncation duals are
    stable, which is reported instead of convergence to the infinite duals.
    """
    D = 2 * N + 64 if D is None else D
    small = dual_family(helson_szego_family(alpha, N, D)).B_dual
    big = dual_family(helson_szego_family(alpha, N, 2 * D)).B_dual
    pad = np.zeros_like(big)
    pad[: D + 1] = small
    return float(np.max(np.abs(big - pad)))


def default_noest_sequences(N: int) -> tuple[np.ndarray, np.ndarray]:
    """c_n = sqrt(n+1); lambda_{2n+1} = exp(2 pi i/(n+2)), lambda_{2n} = exp(i/((n+1) c_n)) lambda_{2n+1}."""
    n = np.arange(N, dtype=float)
    c = np.sqrt(n + 1)
    odd = TWO_PI / (n + 2)
    even = odd + 1.0 / ((n + 1) * c)
    angles = np.empty(2 * N)
    angles[0::2] = even
    angles[1::2] = odd
    return c, angles


@dataclass(eq=False)
class NoEstSystem:
    system: BiorthogonalSystem
    T: MatrixOperator
    X: MatrixOperator
    X_star: MatrixOperator
    c: np.ndarray
    spec: EigenSystemSpec
    alpha: np.ndarray
    alpha_dual: np.ndarray

    def __iter__(self):
        return iter((self.system, self.T, self.X, self.X_star))

    @property
    def coupling_sup(self) -> float:
        """sup_n c_n |lambda_{2n} - lambda_{2n+1}|."""
        lam = self.spec.eigenvalues
        return float(np.max(self.c * np.abs(lam[0::2] - lam[1::2])))

    def off_diagonal_norm(self) -> float:
        """||P_{H_0} T|_{H_1}|| with H_0 = even and H_1 = odd coordinates."""
        A = self.T.entries
        return spectral_norm(A[0::2, 1::2])


def _check_sequences(c: np.ndarray, alpha: np.ndarray, alpha_d: np.ndarray, cap: float = 1e3, floor: float = 1e-3):
    checks = [
        ("sup alpha_n < inf", np.max(alpha) <= cap),
        ("sup alpha'_n < inf", np.max(alpha_d) <= cap),
        ("sup c_n alpha_{2n} < inf", np.max(c * alpha[0::2]) <= cap),
        ("sup c_n alpha'_{2n+1} < inf", np.max(c * alpha_d[1::2]) <= cap),
        ("inf alpha_{2n+1} > 0", np.min(alpha[1::2]) >= floor),
        ("inf alpha'_{2n} > 0", np.min(alpha_d[0::2]) >= floor),
        ("inf (1+c_n^2)^{1/2} alpha_{2n} > 0", np.min(np.sqrt(1 + c**2) * alpha[0::2]) >= floor),
        ("inf (1+c_n^2)^{1/2} alpha'_{2n+1} > 0", np.min(np.sqrt(1 + c**2) * alpha_d[1::2]) >= floor),
    ]
    for name, ok in checks:
        if not ok:
            raise ConstraintError(f"scaling sequences violate {name}", inequality=name)


def example_noest_system(
    c_seq: Sequence[float] | None = None,
    angle_seq: Sequence[float] | None = None,
    N: int = 32,
    coupling_cap: float = 1e3,
) -> NoEstSystem:
    """Two-by-two block system x_{2n} = e_{2n}, x_{2n+1} = e_{2n+1} + c_n e_{2n}.

    ``N`` counts blocks, so the space has dimension 2N.  ``angle_seq`` holds
    all 2N eigenvalue angles; by default see ``default_noest_sequences``.
    The returned X and X_star are the canonical maps X x_n = alpha_n e_n and
    X_star x'_n = alpha'_n e_n with alpha_{2n} = alpha'_{2n+1} = (1+c_n^2)^{-1/2}
    and alpha_{2n+1} = alpha'_{2n} = 1.
    """
    dc, da = default_noest_sequences(N)
    c = dc if c_seq is None else np.asarray(c_seq, dtype=float)[:N]
    angles = da if angle_seq is None else np.asarray(angle_seq, dtype=float)[: 2 * N]
    if c.size < N or angles.size < 2 * N:
        raise PreconditionError("sequences shorter than the requested truncation", N=N)
    if np.any(c <= 0):
        raise ConstraintError("c_n must be positive", inequality="c_n > 0")
    if N > 1 and (np.any(np.diff(c) < 0) or c[-1] <= c[0]):
        raise ConstraintError("c_n must increase to infinity over the range", inequality="c_n -> inf")
    spec = EigenSystemSpec(angles, family_kind="block-pair", params={"c": c.tolist()})
    lam = spec.eigenvalues
    coupling = float(np.max(c * np.abs(lam[0::2] - lam[1::2])))
    if coupling > coupling_cap:
        raise ConstraintError(
            f"sup c_n |lambda_2n - lambda_2n+1| = {coupling:.3e} is not bounded",
            inequality="sup c_n |lambda_2n - lambda_2n+1| < inf",
        )

    dim = 2 * N
    window = IndexWindow(0, dim - 1)
    E = np.eye(dim)
    P = E.copy()
    Pd = E.copy()
    for n in range(N):
        P[2 * n, 2 * n + 1] = c[n]
        Pd[2 * n + 1, 2 * n] = -c[n]
    primal = _family_from_matrix(window, P)
    dual = _family_from_matrix(window, Pd)
    system = closed_form_system(primal, dual)

    alpha = np.ones(dim)
    alpha_d = np.ones(dim)
    alpha[0::2] = 1 / np.sqrt(1 + c**2)
    alpha_d[1::2] = 1 / np.sqrt(1 + c**2)
    _check_sequences(c, alpha, alpha_d)

    T = MatrixOperator(window, window, (P * lam) @ Pd.conj().T)
    X = MatrixOperator(window, window, (E * alpha) @ Pd.conj().T)
    X_star = MatrixOperator(window, window, (E * alpha_d) @ P.conj().T)
    return NoEstSystem(system, T, X, X_star, c, spec, alpha, alpha_d)


def scaled_intertwiner(system: BiorthogonalSystem, scales: Sequence[float]) -> MatrixOperator:
    """X with X x_n = alpha_n e_n; e_n is the coordinate basis of [0, N-1]."""
    a = np.asarray(scales, dtype=float)
    if a.size != len(system) or np.any(a <= 0):
        raise PreconditionError("need one positive scale per family member", size=len(system))
    codomain = IndexWindow(0, len(system) - 1)
    entries = a[:, None] * system.B_dual.conj().T
    return MatrixOperator(system.window, codomain, entries)


def intertwiner_bound(system: BiorthogonalSystem, scales: Sequence[float]) -> float:
    """sqrt(sum alpha_n^2 ||Q_n||^2): the norm bound for ``scaled_intertwiner``."""
    a = np.asarray(scales, dtype=float)
    q = np.array([x.norm() * xd.norm() for x, xd in zip(system.primal, system.dual)])
    return float(np.sqrt(np.sum(a**2 * q**2)))


def coordinate_unitary(eigenvalues: Sequence[complex]) -> MatrixOperator:
    """U_0 e_n = lambda_n e_n on [0, N-1]."""
    lam = np.asarray(eigenvalues, dtype=complex)
    w = IndexWindow(0, lam.size - 1)
    return MatrixOperator(w, w, np.diag(lam))


def canonical_map(system: BiorthogonalSystem) -> MatrixOperator:
    """X x_n = e_n (all scales one)."""
    return scaled_intertwiner(system, np.ones(len(system)))


def direct_sum(a: MatrixOperator, b: MatrixOperator) -> MatrixOperator:
    w = IndexWindow(0, a.domain.size + b.domain.size - 1)
    cw = IndexWindow(0, a.codomain.size + b.codomain.size - 1)
    return MatrixOperator(w, cw, scipy.linalg.block_diag(a.entries, b.entries))


def direct_sum_family(f: Sequence[FourierVector], g: Sequence[FourierVector]) -> list[FourierVector]:
    """Embed two families into the direct sum of their (unweighted) windows."""
    n1, n2 = f[0].window.size, g[0].window.size
    w = IndexWindow(0, n1 + n2 - 1)
    out = [FourierVector(w, np.concatenate([x.orthonormalized().coeffs, np.zeros(n2)])) for x in f]
    out += [FourierVector(w, np.concatenate([np.zeros(n1), y.orthonormalized().coeffs])) for y in g]
    return out


def tolerance_ok(value: float, name: str = "algebraic") -> bool:
    return value < tolerances.get(name)
