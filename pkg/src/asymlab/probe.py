"""Asymptotic diagnostics for truncated power-bounded operators.

The Banach-limit Gram form lim (T^n x_i, T^n x_j) is replaced by Cesaro
averages over dyadic blocks of powers.  Existence verdicts for unitary
asymptotes are trend statements fitted across truncation ladders, never
certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from . import tolerances
from .errors import NotPowerBoundedError, PreconditionError, RankDeficientError, WindowMismatchError
from .linalg import (
    FourierVector,
    MatrixOperator,
    column_matrix,
    singular_values,
    smallest_singular_value,
    spectral_norm,
)


@dataclass
class GramLimitReport:
    gram: np.ndarray
    iterations_used: int
    residual: float
    converged: bool
    block_means: list[np.ndarray] = field(default_factory=list, repr=False)


@dataclass
class AsymptoteVerdict:
    kind: str  # lower-bound-holds | lower-bound-decays | inconclusive
    lower_bound_curve: list[tuple[int, float]]
    trend_exponent: float
    r_squared: float = float("nan")


@dataclass
class CClassTag:
    forward: str  # C0dot | C1dot | mixed
    backward: str
    per_vector_limits: list[tuple[str, float]]
    per_vector_limits_adjoint: list[tuple[str, float]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def pattern(self) -> str:
        """Two-letter class label such as ``C10``; ``?`` marks a mixed side."""
        digit = {"C1dot": "1", "C0dot": "0", "mixed": "?"}
        return "C" + digit[self.forward] + digit[self.backward]


def _probe_matrix(T: MatrixOperator, probes: Sequence[FourierVector]) -> np.ndarray:
    if T.domain != T.codomain:
        raise WindowMismatchError("operator must be square", domain=str(T.domain), codomain=str(T.codomain))
    for p in probes:
        if p.window != T.domain:
            raise WindowMismatchError(
                f"probe window {p.window} is not the operator domain {T.domain}",
                left=str(T.domain),
                right=str(p.window),
            )
    return column_matrix(probes)


def _dyadic_blocks(max_power: int) -> list[tuple[int, int]]:
    blocks = []
    k = 0
    while 2**k <= max_power:
        lo, hi = 2**k, min(2 ** (k + 1) - 1, max_power)
        blocks.append((lo, hi))
        k += 1
    return blocks


def cesaro_gram_limit(
    T: MatrixOperator,
    probes: Sequence[FourierVector],
    max_power: int = 64,
    tol: float | None = None,
    cap: float | None = None,
) -> GramLimitReport:
    """Estimate lim_n (T^n p_i, T^n p_j) by averaging the Gram over dyadic blocks of n.

    The estimate is the mean over the last block [2^K, max_power]; ``residual``
    is the largest entry change between the last two block means.
    """
    tol = tolerances.get("iterative") if tol is None else tol
    cap = tolerances.get("power_cap") if cap is None else cap
    if max_power < 8:
        raise PreconditionError("max_power must be at least 8", max_power=max_power)
    P = _probe_matrix(T, probes)
    base = np.linalg.norm(P, axis=0)
    base[base == 0] = 1.0
    A = T.entries
    blocks = _dyadic_blocks(max_power)
    sums = [np.zeros((P.shape[1], P.shape[1]), dtype=complex) for _ in blocks]
    X = P.copy()
    b = 0
    for n in range(1, max_power + 1):
        X = A @ X
        growth = np.max(np.linalg.norm(X, axis=0) / base)
        if not np.isfinite(growth) or growth > cap:
            raise NotPowerBoundedError(
                f"||T^{n} x|| / ||x|| = {growth:.3e} exceeds cap {cap:.1e}", power=n, growth=float(growth)
            )
        while n > blocks[b][1]:
            b += 1
        # (T^n p_i, T^n p_j) = sum_k X[k,i] conj(X[k,j])
        sums[b] += X.T @ X.conj()
    means = [s / (hi - lo + 1) for s, (lo, hi) in zip(sums, blocks)]
    gram = means[-1]
    gram = 0.5 * (gram + gram.conj().T)
    residual = float(np.max(np.abs(means[-1] - means[-2]))) if len(means) > 1 else float("inf")
    return GramLimitReport(
        gram=gram,
        iterations_used=max_power,
        residual=residual,
        converged=residual < tol,
        block_means=means,
    )


def _decoupled_blocks(A: np.ndarray) -> list[np.ndarray]:
    """Index sets of the connected components of the sparsity graph of A."""
    n_comp, labels = scipy.sparse.csgraph.connected_components(
        scipy.sparse.csr_matrix(np.abs(A) + np.abs(A.T) > 0), directed=False
    )
    return [np.nonzero(labels == k)[0] for k in range(n_comp)]


def power_bound(T: MatrixOperator, n_max: int, cap: float | None = None) -> float:
    """max_{1<=k<=n_max} ||T^k||, block by block when T decouples."""
    cap = tolerances.get("power_cap") if cap is None else cap
    if T.domain != T.codomain:
        raise WindowMismatchError("power_bound needs a square operator")
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1", n_max=n_max)
    A = T.entries
    blocks = _decoupled_blocks(A)
    norms = np.zeros(n_max)
    for idx in blocks:
        B = A[np.ix_(idx, idx)]
        P = B.copy()
        for k in range(1, n_max + 1):
            if k > 1:
                P = P @ B
            if not np.all(np.isfinite(P)):
                raise NotPowerBoundedError(f"overflow while forming T^{k}", power=k)
            nk = spectral_norm(P)
            if nk > cap:
                raise NotPowerBoundedError(f"||T^{k}|| = {nk:.3e} exceeds cap {cap:.1e}", power=k, norm=nk)
            norms[k - 1] = max(norms[k - 1], nk)
    return float(norms.max())


def _orbit_limits(A: np.ndarray, P: np.ndarray, n_max: int, tol: float) -> tuple[np.ndarray, list[int]]:
    norms0 = np.linalg.norm(P, axis=0)
    X = P.copy()
    half = None
    for n in range(1, n_max + 1):
        X = A @ X
        if n == max(1, n_max // 2):
            half = np.linalg.norm(X, axis=0) / norms0
    final = np.linalg.norm(X, axis=0) / norms0
    unsettled = [
        i for i in range(P.shape[1]) if final[i] > tol and abs(final[i] - half[i]) > 0.5 * max(final[i], half[i])
    ]
    return final, unsettled


def _side(limits: np.ndarray, tol: float) -> str:
    if np.min(limits) > tol:
        return "C1dot"
    if np.max(limits) < tol:
        return "C0dot"
    return "mixed"


def classify_c_class(
    T: MatrixOperator,
    probes: Sequence[FourierVector],
    n_max: int = 64,
    tol: float | None = None,
    labels: Sequence[str] | None = None,
) -> CClassTag:
    """C_{ab} tag from orbit norms ||T^n x|| / ||x|| at n = n_max, for T and for T^*.

    Keep ``n_max`` below the distance from the probe supports to the window
    edges, otherwise truncation rather than the operator kills the orbits.
    """
    tol = tolerances.get("c_class") if tol is None else tol
    P = _probe_matrix(T, probes)
    labels = list(labels) if labels is not None else [f"probe{i}" for i in range(len(probes))]
    power_bound(T, min(n_max, 8))
    fwd, fwd_bad = _orbit_limits(T.entries, P, n_max, tol)
    bwd, bwd_bad = _orbit_limits(T.entries.conj().T, P, n_max, tol)
    diagnostics = [f"forward orbit of {labels[i]} not settled" for i in fwd_bad]
    diagnostics += [f"adjoint orbit of {labels[i]} not settled" for i in bwd_bad]
    return CClassTag(
        forward="mixed" if fwd_bad else _side(fwd, tol),
        backward="mixed" if bwd_bad else _side(bwd, tol),
        per_vector_limits=list(zip(labels, map(float, fwd))),
        per_vector_limits_adjoint=list(zip(labels, map(float, bwd))),
        diagnostics=diagnostics,
    )


def riesz_bounds(family: Sequence[FourierVector], normalize: bool = True) -> tuple[float, float]:
    """Extreme singular values of the column matrix of ``family``.

    With ``normalize`` the columns are scaled to unit norm first, so ``lower**2``
    is the best lower frame constant of the truncated family and ``upper**2`` the
    best upper one.
    """
    B = column_matrix(family)
    if normalize:
        B = B / np.linalg.norm(B, axis=0)
    s = singular_values(B)
    if s[-1] <= tolerances.get("dependence") * s[0] or B.shape[0] < B.shape[1]:
        rank = int(np.sum(s > tolerances.get("dependence") * s[0]))
        raise RankDeficientError(
            f"family of {B.shape[1]} vectors is numerically dependent (rank {rank})", rank=rank
        )
    return float(s[-1]), float(s[0])


def verdict_from_curve(curve: Sequence[tuple[int, float]]) -> AsymptoteVerdict:
    if len(curve) < 3:
        raise PreconditionError("ladder needs at least 3 rungs", rungs=len(curve))
    Ns = np.array([c[0] for c in curve], dtype=float)
    if np.any(np.diff(Ns) <= 0):
        raise PreconditionError("ladder must be strictly increasing in N")
    lows = np.array([c[1] for c in curve], dtype=float)
    if np.any(lows <= 0):
        return AsymptoteVerdict("inconclusive", list(curve), float("-inf"))
    x, y = np.log(Ns), np.log(lows)
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    thr = tolerances.get("slope")
    if slope < -thr and r2 >= 0.9:
        kind = "lower-bound-decays"
    elif slope >= -thr and lows.min() > tolerances.get("iterative"):
        kind = "lower-bound-holds"
    else:
        kind = "inconclusive"
    return AsymptoteVerdict(kind, [(int(n), float(v)) for n, v in curve], float(slope), r2)


def asymptote_verdict(family_ladder: Sequence[tuple[int, Sequence[FourierVector]]]) -> AsymptoteVerdict:
    """Fit log(lower Riesz bound) against log N and label the trend."""
    if len(family_ladder) < 3:
        raise PreconditionError("ladder needs at least 3 rungs", rungs=len(family_ladder))
    curve = [(N, riesz_bounds(fam)[0]) for N, fam in family_ladder]
    return verdict_from_curve(curve)


def delta_lower_bound(X: MatrixOperator, subspace_basis: Sequence[FourierVector]) -> float:
    """inf over unit x in span(basis) of ||X x||."""
    if not subspace_basis:
        raise PreconditionError("empty subspace basis")
    B = column_matrix(subspace_basis)
    if subspace_basis[0].window != X.domain:
        raise WindowMismatchError("basis does not live in the domain of X", left=str(X.domain))
    Q, _ = np.linalg.qr(B)
    return smallest_singular_value(X.entries @ Q)


def check_delta_qn_product(X: MatrixOperator, system) -> list[float]:
    """delta_n * ||Q_n|| for each member of a biorthogonal system (one-dimensional pieces)."""
    out = []
    for x, xd in zip(system.primal, system.dual):
        delta = delta_lower_bound(X, [x])
        out.append(delta * x.norm() * xd.norm())
    return out


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def relative_variation(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / v.max()) if v.max() > 0 else 0.0
