"""Truncated bilateral weighted shifts on L^2_omega with omega(n) = 1 for n >= 0.

All matrices act in the orthonormal coordinates e_n = chi^n / omega(n) on a
window [-M, M].  Weights are evaluated through log omega so that e^n at
n = 10^4 never overflows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tolerances
from .errors import NonFiniteError, PreconditionError, WindowMismatchError
from .linalg import FourierVector, IndexWindow, MatrixOperator, column_matrix, shift_matrix, smallest_singular_value
from .probe import cesaro_gram_limit

UNBOUNDED_LEVEL = 1e3
DEFAULT_LADDER = (10, 100, 1000, 10000)


@dataclass(frozen=True, eq=False)
class Weight:
    kind: str  # exponential | stretched | table
    window: IndexWindow
    param: float = 1.0
    table: tuple[float, ...] = field(default=())  # omega(-1), omega(-2), ...

    def __post_init__(self):
        if self.kind not in ("exponential", "stretched", "table"):
            raise PreconditionError(f"unknown weight kind {self.kind!r}", field="kind")
        if self.window.lo > -1 or self.window.hi < 0:
            raise WindowMismatchError("weight window must contain -1 and 0", window=str(self.window))
        if self.kind == "exponential" and not self.param >= 0:
            raise PreconditionError("exponential rate must be nonnegative", field="param")
        if self.kind == "stretched" and not 0 < self.param <= 1:
            raise PreconditionError("stretched exponent must lie in (0, 1]", field="param")
        if self.kind == "table":
            t = np.asarray(self.table, dtype=float)
            if t.size < -self.window.lo:
                raise PreconditionError("table shorter than the negative half of the window", field="table")
            if np.any(t < 1) or np.any(np.diff(np.concatenate([[1.0], t])) < 0):
                bad = int(np.nonzero((t < 1) | (np.diff(np.concatenate([[1.0], t])) < 0))[0][0]) + 1
                raise PreconditionError(f"omega must be nonincreasing and >= 1; fails at n = -{bad}", n=-bad)

    @classmethod
    def exponential(cls, beta: float, M: int) -> Weight:
        return cls("exponential", IndexWindow.symmetric(M), float(beta))

    @classmethod
    def stretched(cls, alpha: float, M: int) -> Weight:
        return cls("stretched", IndexWindow.symmetric(M), float(alpha))

    @classmethod
    def from_table(cls, values: Sequence[float], M: int | None = None) -> Weight:
        M = len(values) if M is None else M
        return cls("table", IndexWindow.symmetric(M), table=tuple(float(v) for v in values))

    @classmethod
    def trivial(cls, M: int) -> Weight:
        return cls("exponential", IndexWindow.symmetric(M), 0.0)

    def with_window(self, M: int) -> Weight:
        return Weight(self.kind, IndexWindow.symmetric(M), self.param, self.table)

    def log_negative(self, n: np.ndarray) -> np.ndarray:
        """log omega(-n) for n >= 0."""
        n = np.asarray(n, dtype=float)
        if self.kind == "exponential":
            return self.param * n
        if self.kind == "stretched":
            return n**self.param
        t = np.log(np.concatenate([[1.0], np.asarray(self.table, dtype=float)]))
        idx = n.astype(int)
        if np.any(idx >= t.size):
            raise PreconditionError(f"weight table ends at n = -{t.size - 1}", field="table")
        return t[idx]

    def log_omega(self, indices) -> np.ndarray:
        k = np.asarray(indices)
        return np.where(k < 0, self.log_negative(np.maximum(-k, 0)), 0.0)

    def omega(self, indices) -> np.ndarray:
        return np.exp(self.log_omega(indices))

    @property
    def unbounded_trend(self) -> bool:
        return bool(self.log_negative(np.array([-self.window.lo]))[0] > np.log(UNBOUNDED_LEVEL))


@dataclass
class WeightVerdict:
    invertibility_index: float
    quasi_partial_sums: list[float]
    verdict: str  # quasianalytic-trend | regular-trend | inconclusive
    ladder: list[int] = field(default_factory=list)
    growth_slope: float = float("nan")
    tail_estimate: float = float("nan")


def weighted_shift(w: Weight) -> MatrixOperator:
    """Multiplication by chi: e_n -> (omega(n+1)/omega(n)) e_{n+1}."""
    idx = w.window.indices
    lo = w.log_omega(idx)
    ratios = np.exp(lo[1:] - lo[:-1])
    A = np.diag(ratios.astype(complex), k=-1)
    return MatrixOperator.square(w.window, A)


def invertibility_index(w: Weight) -> float:
    """max omega(n-1)/omega(n) over the window."""
    lo = w.log_omega(w.window.indices)
    return float(np.exp(np.max(lo[:-1] - lo[1:])))


def embedding_Y(w: Weight) -> MatrixOperator:
    """Natural embedding into unweighted L^2: diag(1/omega(n))."""
    return MatrixOperator.square(w.window, np.diag(np.exp(-w.log_omega(w.window.indices))))


def unweighted_shift(window: IndexWindow) -> MatrixOperator:
    return MatrixOperator.square(window, shift_matrix(window.size))


def nested_embedding_J(w0: Weight, w: Weight) -> MatrixOperator:
    """Natural embedding of L^2_{omega0} into L^2_omega: diag(omega(n)/omega0(n))."""
    if w0.window != w.window:
        raise WindowMismatchError("weights live on different windows", left=str(w0.window), right=str(w.window))
    idx = w.window.indices
    diff = w.log_omega(idx) - w0.log_omega(idx)
    if np.any(diff > 1e-12):
        bad = int(idx[np.argmax(diff > 1e-12)])
        raise PreconditionError(f"omega0 < omega at n = {bad}", n=bad)
    return MatrixOperator.square(w.window, np.diag(np.exp(diff)))


def quasianalytic_partial_sums(w: Weight, N: int) -> np.ndarray:
    """S_k = sum_{n<=k} log omega(-n)/n^2 for k = 1..N."""
    n = np.arange(1, N + 1, dtype=float)
    return np.cumsum(w.log_negative(n) / n**2)


def quasianalytic_classifier(w: Weight, N_ladder: Sequence[int] = DEFAULT_LADDER) -> WeightVerdict:
    """Trend verdict on the divergence of sum log omega(-n)/n^2.

    The increments dS/dlog N between rungs are fitted as a power of N: a flat
    fit (log-like growth) reads as quasianalytic, a clearly negative exponent
    as a convergent Cauchy tail, whose remainder is estimated from the fit.
    """
    ladder = [int(x) for x in N_ladder]
    if len(ladder) < 3 or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] < 1:
        raise PreconditionError("ladder must have at least 3 increasing positive rungs", field="N_ladder")
    S = quasianalytic_partial_sums(w, ladder[-1])
    sums = [float(S[N - 1]) for N in ladder]
    index = invertibility_index(w)
    if not np.any(S):
        return WeightVerdict(index, sums, "regular-trend", ladder, float("-inf"), 0.0)
    logN = np.log(ladder)
    rate = np.diff(sums) / np.diff(logN)
    mid = 0.5 * (logN[1:] + logN[:-1])
    if np.any(rate <= 0):
        return WeightVerdict(index, sums, "inconclusive", ladder)
    slope, intercept = (float(x) for x in np.polyfit(mid, np.log(rate), 1))
    thr = tolerances.get("slope")
    if abs(slope) <= thr:
        verdict, tail = "quasianalytic-trend", float("inf")
    elif slope < -4 * thr:
        # remainder of a sum whose increments per log N decay like N^slope
        verdict, tail = "regular-trend", float(np.exp(intercept + slope * logN[-1]) / -slope)
    else:
        verdict, tail = "inconclusive", float("nan")
    return WeightVerdict(index, sums, verdict, ladder, slope, tail)


def inverse_compression_eigenvector(w: Weight, zeta: complex, M: int | None = None) -> tuple[FourierVector, float]:
    """Eigenvector f of the adjoint of S_omega^{-1} restricted to span{e_n : n <= 0}.

    f^(0) = 1, f^(-n) = zeta^n / omega(-n)^2, f^(n) = 0 for n > 0; the
    eigenvalue is zeta.  The residual is measured on the whole truncated
    half-window, so it includes the edge term |zeta|^{M+1}/omega(-M).
    """
    if M is not None and M != -w.window.lo:
        w = w.with_window(M)
    M = -w.window.lo
    if abs(zeta) > 1:
        raise PreconditionError("need |zeta| <= 1", zeta=str(zeta))
    index = invertibility_index(w)
    if not np.isfinite(index) or index > 1e12:
        raise NonFiniteError("S_omega is not invertible at this truncation", index=index)
    if M / w.omega(np.array([-M]))[0] ** 2 >= 1:
        raise PreconditionError("sum 1/omega(-n)^2 does not look summable on this window", M=M)
    n = np.arange(M + 1)
    log_om = w.log_negative(n)
    powers = complex(zeta) ** n if zeta != 0 else (n == 0).astype(complex)
    a = powers * np.exp(-log_om)  # orthonormal coordinates of f on [-M, 0], index -n
    raw = np.zeros(w.window.size, dtype=complex)
    pos0 = w.window.position(0)
    raw[pos0 - n] = a * np.exp(-log_om)
    f = FourierVector(w.window, raw, w)
    # S_omega^{-1} e_{-n} = (omega(-n-1)/omega(-n)) e_{-n-1}; positions ordered 0, -1, ..., -M
    A = np.diag(np.exp(log_om[1:] - log_om[:-1]).astype(complex), k=-1)
    residual = float(np.linalg.norm(A.conj().T @ a - zeta * a))
    return f, residual


def eigenvector_residual_grid(w: Weight, radius: float = 0.8, step: float = 0.05) -> np.ndarray:
    """Residuals over the grid {x + iy : |x + iy| <= radius} with the given spacing."""
    g = np.arange(-radius, radius + step / 2, step)
    pts = [complex(x, y) for x in g for y in g if abs(complex(x, y)) <= radius + 1e-12]
    return np.array([[p.real, p.imag, inverse_compression_eigenvector(w, p)[1]] for p in pts])


@dataclass
class BlockGramReport:
    component_a_residual: float
    component_b_residual: float
    x0_smallest_singular: float
    gram_a: np.ndarray
    gram_a_oracle: np.ndarray
    assembled: np.ndarray
    assembled_oracle: np.ndarray
    c: float
    verdicts: tuple[str, str]
    iterations: int


def _half_projector(window: IndexWindow, nonnegative: bool) -> np.ndarray:
    idx = window.indices
    return np.diag(((idx >= 0) if nonnegative else (idx < 0)).astype(float))


def block_gram_components(
    w0: Weight,
    w: Weight,
    c: float,
    probes: Sequence[FourierVector],
    max_power: int | None = None,
    h_gram: np.ndarray | None = None,
    ladder: Sequence[int] = DEFAULT_LADDER,
) -> BlockGramReport:
    """Check the two K-free Gram-limit components of the block construction.

    E is the negative-index half of unweighted L^2, M = Y_omega^{-1} E the
    negative half of L^2_omega and K_0 the nonnegative half, on which the
    compressed shift R_0 is the unweighted unilateral shift.  Probes are taken
    in L^2_{omega0} orthonormal coordinates.
    """
    if not 0 < c <= 1:
        raise PreconditionError("c must lie in (0, 1]", field="c")
    v0 = quasianalytic_classifier(w0, ladder).verdict
    v1 = quasianalytic_classifier(w, ladder).verdict
    if v0 != "quasianalytic-trend" or v1 != "regular-trend":
        raise PreconditionError(f"weight pair classified as ({v0}, {v1})", w0=v0, w=v1)
    window = w0.window
    reach = max(p.window.position(int(i)) for p in probes for i in p.window.indices[np.abs(p.coeffs) > 0])
    room = window.size - 1 - reach
    max_power = min(64, room) if max_power is None else max_power
    if max_power > room:
        raise PreconditionError("orbits would leave the window before max_power", room=room)

    T0 = weighted_shift(w0)
    Y = embedding_Y(w).entries
    J = nested_embedding_J(w0, w).entries
    P = column_matrix(probes)
    k = len(probes)
    h_gram = np.zeros((k, k)) if h_gram is None else np.asarray(h_gram)

    # (a) lim (T0^n x_i, T0^n x_j) = (Y J x_i, Y J x_j)
    rep = cesaro_gram_limit(T0, probes, max_power=max_power)
    YJ = Y @ J @ P
    oracle_a = YJ.T @ YJ.conj()
    res_a = float(np.max(np.abs(rep.gram - oracle_a)))

    # (b) limit of the norm recursion against the assembled form with A
    Pk = _half_projector(window, nonnegative=True)
    X0 = c * Pk @ J
    X0P = X0 @ P
    R0 = MatrixOperator.square(window, Pk @ weighted_shift(w).entries @ Pk)
    r0_probes = [FourierVector(window, X0P[:, i]) for i in range(k)]
    rep_r = cesaro_gram_limit(R0, r0_probes, max_power=max_power)
    gram_x0 = X0P.T @ X0P.conj()
    lhs = h_gram + gram_x0 + rep.gram - rep_r.gram
    A = np.sqrt(1 - c**2) * Pk + _half_projector(window, nonnegative=False)
    AYJ = A @ YJ
    rhs = h_gram + gram_x0 + AYJ.T @ AYJ.conj()
    res_b = float(np.max(np.abs(lhs - rhs)))

    x0_min = smallest_singular_value(X0[window.position(0) :, :])
    return BlockGramReport(res_a, res_b, x0_min, rep.gram, oracle_a, lhs, rhs, c, (v0, v1), max_power)
