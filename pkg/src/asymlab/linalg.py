"""Truncated sequence spaces and the dense linear algebra shared by every module.

A truncated element of H^2 or L^2_omega is a ``FourierVector``: a coefficient
table over an inclusive integer ``IndexWindow``.  Operators are
``MatrixOperator`` instances carrying their domain and codomain windows, so
that products and applications can refuse mismatched truncations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

import numpy as np
import scipy.linalg

from . import tolerances
from .errors import NonFiniteError, WindowMismatchError

DENSE_LIMIT = 512


class SupportsOmega(Protocol):
    def omega(self, indices: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class IndexWindow:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")

    @classmethod
    def hardy(cls, D: int) -> IndexWindow:
        return cls(0, D)

    @classmethod
    def symmetric(cls, M: int) -> IndexWindow:
        if M < 1:
            raise ValueError("symmetric window needs M >= 1")
        return cls(-M, M)

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def position(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise IndexError(f"index {n} outside window [{self.lo}, {self.hi}]")
        return n - self.lo

    def __contains__(self, n: object) -> bool:
        return isinstance(n, (int, np.integer)) and self.lo <= n <= self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True, eq=False)
class FourierVector:
    """Coefficients f^(n) for n in ``window``; ``weight`` selects the L^2_omega norm."""

    window: IndexWindow
    coeffs: np.ndarray
    weight: SupportsOmega | None = field(default=None)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != self.window.size:
            raise WindowMismatchError(
                f"{c.size} coefficients for window {self.window} of size {self.window.size}",
                window=str(self.window),
            )
        if not np.all(np.isfinite(c)):
            raise NonFiniteError("FourierVector has non-finite coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def unit(cls, window: IndexWindow, n: int, weight: SupportsOmega | None = None) -> FourierVector:
        c = np.zeros(window.size, dtype=complex)
        c[window.position(n)] = 1.0
        return cls(window, c, weight)

    @classmethod
    def from_dict(cls, window: IndexWindow, values: dict[int, complex], weight=None) -> FourierVector:
        c = np.zeros(window.size, dtype=complex)
        for n, v in values.items():
            c[window.position(n)] = v
        return cls(window, c, weight)

    def __getitem__(self, n: int) -> complex:
        return complex(self.coeffs[self.window.position(n)])

    def weights(self) -> np.ndarray:
        if self.weight is None:
            return np.ones(self.window.size)
        return np.asarray(self.weight.omega(self.window.indices), dtype=float)

    def norm(self) -> float:
        return float(np.sqrt(weighted_inner(self, self).real))

    def orthonormalized(self) -> FourierVector:
        """Coordinates in the orthonormal basis chi^n / omega(n) (unweighted vector)."""
        return FourierVector(self.window, self.coeffs * self.weights())

    def with_coeffs(self, coeffs: np.ndarray) -> FourierVector:
        return FourierVector(self.window, coeffs, self.weight)

    def __add__(self, other: FourierVector) -> FourierVector:
        _check_same_space(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: FourierVector) -> FourierVector:
        _check_same_space(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> FourierVector:
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__


def _check_same_space(f: FourierVector, g: FourierVector) -> None:
    if f.window != g.window:
        raise WindowMismatchError(
            f"window mismatch: {f.window} vs {g.window}", left=str(f.window), right=str(g.window)
        )
    if f.weight is not g.weight:
        raise WindowMismatchError("weight mismatch between vectors", left=str(f.window), right=str(g.window))


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    domain: IndexWindow
    codomain: IndexWindow
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.shape != (self.codomain.size, self.domain.size):
            raise WindowMismatchError(
                f"entries of shape {a.shape} do not match codomain {self.codomain} x domain {self.domain}",
                domain=str(self.domain),
                codomain=str(self.codomain),
            )
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def identity(cls, window: IndexWindow) -> MatrixOperator:
        return cls(window, window, np.eye(window.size))

    @classmethod
    def square(cls, window: IndexWindow, entries: np.ndarray) -> MatrixOperator:
        return cls(window, window, entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def H(self) -> MatrixOperator:
        return MatrixOperator(self.codomain, self.domain, self.entries.conj().T)

    def __matmul__(self, other: Any):
        if isinstance(other, MatrixOperator):
            if other.codomain != self.domain:
                raise WindowMismatchError(
                    f"cannot compose: {other.codomain} -> {self.domain}",
                    left=str(self.domain),
                    right=str(other.codomain),
                )
            return MatrixOperator(other.domain, self.codomain, self.entries @ other.entries)
        if isinstance(other, FourierVector):
            if other.window != self.domain:
                raise WindowMismatchError(
                    f"vector window {other.window} is not the domain {self.domain}",
                    left=str(self.domain),
                    right=str(other.window),
                )
            return FourierVector(self.codomain, self.entries @ other.coeffs)
        return NotImplemented

    def __add__(self, other: MatrixOperator) -> MatrixOperator:
        self._check_same(other)
        return MatrixOperator(self.domain, self.codomain, self.entries + other.entries)

    def __sub__(self, other: MatrixOperator) -> MatrixOperator:
        self._check_same(other)
        return MatrixOperator(self.domain, self.codomain, self.entries - other.entries)

    def __mul__(self, scalar: complex) -> MatrixOperator:
        return MatrixOperator(self.domain, self.codomain, self.entries * scalar)

    __rmul__ = __mul__

    def _check_same(self, other: MatrixOperator) -> None:
        if self.domain != other.domain or self.codomain != other.codomain:
            raise WindowMismatchError(
                "operator windows differ", left=f"{self.domain}->{self.codomain}", right=f"{other.domain}->{other.codomain}"
            )

    def power(self, k: int) -> MatrixOperator:
        if self.domain != self.codomain:
            raise WindowMismatchError("power of a non-square operator")
        return MatrixOperator(self.domain, self.domain, np.linalg.matrix_power(self.entries, k))

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Sub-matrix addressed by window indices (not array positions)."""
        r = [self.codomain.position(i) for i in rows]
        c = [self.domain.position(j) for j in cols]
        return self.entries[np.ix_(r, c)]


def column_matrix(family: Sequence[FourierVector]) -> np.ndarray:
    """Stack a family (sharing one window) as columns, in orthonormal coordinates."""
    if not family:
        raise ValueError("empty family")
    w = family[0].window
    for f in family:
        if f.window != w:
            raise WindowMismatchError(f"family windows differ: {w} vs {f.window}", left=str(w), right=str(f.window))
    return np.column_stack([f.orthonormalized().coeffs for f in family])


def weighted_inner(f: FourierVector, g: FourierVector) -> complex:
    """(f, g) = sum f^(n) conj(g^(n)) omega(n)^2."""
    _check_same_space(f, g)
    w2 = f.weights() ** 2
    return complex(np.sum(f.coeffs * np.conj(g.coeffs) * w2))


def _finite(A: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(A)):
        raise NonFiniteError("matrix has non-finite entries")
    return A


def _entries(A: MatrixOperator | np.ndarray) -> np.ndarray:
    return _finite(A.entries if isinstance(A, MatrixOperator) else np.asarray(A, dtype=complex))


def singular_values(A: MatrixOperator | np.ndarray) -> np.ndarray:
    a = _entries(A)
    if a.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(a)


def _start_vector(n: int) -> np.ndarray:
    # fixed seed keeps iterative estimates deterministic
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _power_sigma_max(a: np.ndarray, tol: float, max_iter: int = 5000) -> float:
    v = _start_vector(a.shape[1])
    sigma = 0.0
    for _ in range(max_iter):
        w = a.conj().T @ (a @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        new_sigma = np.sqrt(nw)
        v = w / nw
        if abs(new_sigma - sigma) <= tol * new_sigma:
            return float(np.linalg.norm(a @ v))
        sigma = new_sigma
    return float(np.linalg.norm(a @ v))


def _inverse_sigma_min(a: np.ndarray, tol: float, max_iter: int = 5000) -> float:
    # a is tall (m >= n); solve (a^H a) x = y through the R factor of a.
    r = scipy.linalg.qr(a, mode="r")[0][: a.shape[1]]
    if np.min(np.abs(np.diag(r))) == 0:
        return 0.0
    v = _start_vector(a.shape[1])
    sigma = np.inf
    for _ in range(max_iter):
        y = scipy.linalg.solve_triangular(r, v, trans="C")
        x = scipy.linalg.solve_triangular(r, y)
        nx = np.linalg.norm(x)
        v = x / nx
        new_sigma = float(np.linalg.norm(a @ v))
        if abs(new_sigma - sigma) <= tol * new_sigma:
            return new_sigma
        sigma = new_sigma
    return sigma


def spectral_norm(A: MatrixOperator | np.ndarray, tol: float | None = None) -> float:
    """Largest singular value; dense SVD up to ``DENSE_LIMIT``, power iteration above."""
    tol = tolerances.get("iterative") if tol is None else tol
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = _entries(A)
    if a.size == 0:
        return 0.0
    if max(a.shape) <= DENSE_LIMIT:
        return float(scipy.linalg.svdvals(a)[0])
    return _power_sigma_max(a, tol)


def smallest_singular_value(A: MatrixOperator | np.ndarray, tol: float | None = None) -> float:
    """Smallest of the min(m, n) singular values; 0 signals numerical singularity."""
    tol = tolerances.get("iterative") if tol is None else tol
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = _entries(A)
    if a.size == 0:
        return 0.0
    if a.shape[0] < a.shape[1]:
        a = a.conj().T
    if max(a.shape) <= DENSE_LIMIT:
        return float(scipy.linalg.svdvals(a)[-1])
    return _inverse_sigma_min(a, tol)


def rank_one(x: FourierVector, y: FourierVector) -> MatrixOperator:
    """The operator z -> (z, y) x, i.e. the matrix x y^H in orthonormal coordinates."""
    xc = x.orthonormalized().coeffs
    yc = y.orthonormalized().coeffs
    return MatrixOperator(y.window, x.window, np.outer(xc, yc.conj()))


def numerical_rank(A: MatrixOperator | np.ndarray, rtol: float | None = None) -> int:
    rtol = tolerances.get("rank") if rtol is None else rtol
    s = singular_values(A)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def shift_matrix(size: int, offset: int = 1) -> np.ndarray:
    """Truncated unweighted shift: e_n -> e_{n+offset}, dropping what leaves the window."""
    return np.eye(size, k=-offset)
