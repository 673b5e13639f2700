"""Model spaces K_u = H^2 - uH^2 for rational inner u built from atomic Clark measures.

For sigma = sum a_n delta_{zeta_n} write D(z) = prod (1 - z conj(zeta_n)) and
N(z) = sum a_n prod_{m != n} (1 - z conj(zeta_m)).  Then
1/(1 - u) = N/D, so u = (N - D)/N, of degree equal to the number of atoms.
Everything below works with Taylor coefficients on a window [0, D].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import numpy.polynomial.polynomial as P
import scipy.linalg

from . import tolerances
from .errors import ConstraintError, PreconditionError, WindowMismatchError
from .linalg import FourierVector, IndexWindow, MatrixOperator, column_matrix, numerical_rank, singular_values
from .rational import Rational, series, trim

CIRCLE_SAMPLES = 256
ATOM_SEPARATION = 1e-10
ATOM_SNAP = 1e-11


def circle_points(n: int = CIRCLE_SAMPLES) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


@dataclass
class ClarkMeasure:
    atoms: list[tuple[complex, float]]

    def __post_init__(self):
        if not self.atoms:
            raise PreconditionError("a Clark measure needs at least one atom")
        z = np.array([complex(a[0]) for a in self.atoms])
        m = np.array([float(a[1]) for a in self.atoms])
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise PreconditionError("atom masses must be positive and finite")
        if np.max(np.abs(np.abs(z) - 1)) > tolerances.get("unimodular"):
            raise PreconditionError("atoms must lie on the unit circle")
        z = z / np.abs(z)
        gaps = np.abs(z[:, None] - z[None, :]) + 2 * np.eye(z.size)
        if gaps.min() < ATOM_SEPARATION:
            i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            raise PreconditionError(f"atoms {i} and {j} collide", first=int(i), second=int(j))
        m = m / m.sum()
        self.atoms = list(zip(z.tolist(), m.tolist()))

    @property
    def zetas(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @property
    def masses(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])

    def __len__(self) -> int:
        return len(self.atoms)

    def cauchy_transform(self, z):
        """sum a_n / (1 - z conj(zeta_n))."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.sum(self.masses / (1 - z[..., None] * np.conj(self.zetas)), axis=-1)


@dataclass(frozen=True, eq=False)
class RationalInner(Rational):
    degree: int = 0
    measure: ClarkMeasure | None = field(default=None, repr=False)

    def invariant_residuals(self, samples: int = CIRCLE_SAMPLES) -> dict[str, float]:
        z = circle_points(samples)
        poles = self.poles()
        return {
            "unimodular": float(np.max(np.abs(np.abs(self(z)) - 1))),
            "at_zero": float(abs(self(0.0))),
            "pole_margin": float(np.min(np.abs(poles)) - 1) if poles.size else float("inf"),
            "coefficients": self.coefficient_consistency(),
        }

    def validate(self) -> RationalInner:
        r = self.invariant_residuals()
        if not r["unimodular"] <= tolerances.get("unimodular"):
            raise PreconditionError(f"|u| deviates from 1 by {r['unimodular']:.3e} on the circle", **r)
        if not r["at_zero"] <= tolerances.get("inner_at_zero"):
            raise PreconditionError(f"u(0) = {r['at_zero']:.3e} is not zero", **r)
        if not r["pole_margin"] > 0:
            raise PreconditionError("u has a pole in the closed disk", **r)
        if not r["coefficients"] <= tolerances.get("unimodular"):
            raise PreconditionError("coefficient form disagrees with the atom form of u", **r)
        return self


@dataclass(frozen=True, eq=False)
class _InnerFromAtoms:
    """u = 1 - 1/C with C the Cauchy transform; stable near clustered atoms."""

    sigma: ClarkMeasure

    def __call__(self, z):
        c = np.asarray(self.sigma.cauchy_transform(z))
        with np.errstate(invalid="ignore", divide="ignore"):
            out = 1 - 1 / c
        return np.where(np.isfinite(c), out, 1.0)


@dataclass(frozen=True, eq=False)
class _TransformRatio:
    """phi0 = C_u / C_v for measures on the same atoms; at an atom the value is the mass ratio."""

    sigma_u: ClarkMeasure
    sigma_v: ClarkMeasure

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(invalid="ignore"):
            out = np.asarray(self.sigma_u.cauchy_transform(z) / self.sigma_v.cauchy_transform(z))
        zu, zv = self.sigma_u.zetas, self.sigma_v.zetas
        # at (or within rounding of) an atom both transforms blow up; the limit is the mass ratio
        dist = np.abs(z[..., None] - zv)
        bad = ~np.isfinite(out) | (np.min(dist, axis=-1) < ATOM_SNAP)
        if np.any(bad):
            iv = np.argmin(dist[bad], axis=-1)
            iu = np.argmin(np.abs(zv[iv][:, None] - zu[None, :]), axis=1)
            out = out.copy()
            out[bad] = self.sigma_u.masses[iu] / self.sigma_v.masses[iv]
        return out


def _atom_polynomials(sigma: ClarkMeasure) -> tuple[np.ndarray, np.ndarray]:
    factors = [np.array([1.0, -np.conj(z)]) for z in sigma.zetas]
    Dz = np.array([1.0 + 0j])
    for f in factors:
        Dz = P.polymul(Dz, f)
    Nz = np.zeros(len(sigma), dtype=complex)
    for n, a in enumerate(sigma.masses):
        term = np.array([a + 0j])
        for m, f in enumerate(factors):
            if m != n:
                term = P.polymul(term, f)
        Nz[: term.size] += term
    return Dz, Nz


def clark_inner(sigma: ClarkMeasure) -> RationalInner:
    """The inner u with 1/(1 - u) equal to the Cauchy transform of ``sigma``."""
    Dz, Nz = _atom_polynomials(sigma)
    num = np.zeros(len(sigma) + 1, dtype=complex)
    num[: Nz.size] += Nz
    num -= Dz
    num[0] = 0.0  # N(0) = sum a_n = 1 = D(0)
    return RationalInner(num, Nz, _InnerFromAtoms(sigma), degree=len(sigma), measure=sigma).validate()


def clark_measure_of(u: RationalInner) -> ClarkMeasure:
    """Atoms are the solutions of u = 1, masses 1/|u'(zeta)|."""
    p = trim(P.polysub(u.numerator, u.denominator))
    zetas = P.polyroots(p)
    masses = 1 / np.abs(u.derivative(zetas))
    return ClarkMeasure(list(zip((zetas / np.abs(zetas)).tolist(), masses.tolist())))


def yy0_residual(u: Rational, sigma: ClarkMeasure, radius: float = 0.5, samples: int = 64) -> float:
    """max |1/(1 - u) - Cauchy transform| on a circle inside the disk."""
    z = radius * circle_points(samples)
    return float(np.max(np.abs(1 / (1 - u(z)) - sigma.cauchy_transform(z))))


def reproducing_kernel(u: RationalInner, zeta: complex, D: int) -> FourierVector:
    """Taylor coefficients of (1 - conj(u(zeta)) u(z)) / (1 - conj(zeta) z) on [0, D]."""
    if abs(abs(zeta) - 1) > tolerances.get("unimodular"):
        raise PreconditionError("kernel point must be on the unit circle", zeta=str(zeta))
    if D < 2 * u.degree:
        raise PreconditionError("need D >= 2 deg u", D=D, degree=u.degree)
    den_at = P.polyval(zeta, u.denominator)
    if abs(den_at) < 1e-10 or np.min(np.abs(u.poles() - zeta), initial=np.inf) < 1e-8:
        raise PreconditionError("u is singular at the kernel point", zeta=str(zeta))
    uz = u(zeta)
    num = P.polysub(u.denominator, np.conj(uz) * u.numerator)
    # num vanishes at zeta because |u(zeta)| = 1, so the division is exact
    q, r = P.polydiv(num, np.array([1.0, -np.conj(zeta)]))
    if np.max(np.abs(r)) > 1e-8 * max(1.0, np.max(np.abs(num))):
        raise PreconditionError("kernel numerator does not vanish at zeta", remainder=float(np.max(np.abs(r))))
    return FourierVector(IndexWindow.hardy(D), series(q, u.denominator, D))


def kernel_norm_squared(u: RationalInner, zeta) -> np.ndarray:
    """||k_{u,zeta}||^2 = |u'(zeta)| on the circle."""
    return np.abs(u.derivative(zeta))


def kernel_norm_level_sets(v: RationalInner, levels: Sequence[float], samples: int = 1024) -> dict:
    """Bucket circle samples by C_n < ||k_{v,zeta}|| <= C_{n+1}; reporting only."""
    C = np.asarray(levels, dtype=float)
    if C.size < 2 or np.any(np.diff(C) <= 0):
        raise PreconditionError("levels must be increasing with at least two entries")
    z = circle_points(samples)
    norms = np.sqrt(kernel_norm_squared(v, z))
    idx = np.searchsorted(C, norms, side="left") - 1
    counts = [int(np.sum(idx == n)) for n in range(C.size - 1)]
    return {
        "levels": C.tolist(),
        "fraction": [c / samples for c in counts],
        "below": int(np.sum(idx < 0)),
        "above": int(np.sum(idx >= C.size - 1)),
        "max_norm": float(norms.max()),
    }


def multiplication_matrix(coeffs: np.ndarray, D: int) -> np.ndarray:
    """Lower triangular Toeplitz section of multiplication by a Taylor series."""
    c = np.zeros(D + 1, dtype=complex)
    n = min(D + 1, len(coeffs))
    c[:n] = coeffs[:n]
    return scipy.linalg.toeplitz(c, np.zeros(D + 1))


@dataclass(eq=False)
class ModelSpaceRep:
    inner: RationalInner
    ortho_basis: list[FourierVector]
    clark_basis: list[FourierVector]
    dim: int

    @property
    def window(self) -> IndexWindow:
        return self.ortho_basis[0].window

    @property
    def Q(self) -> np.ndarray:
        return column_matrix(self.ortho_basis)

    @property
    def D(self) -> int:
        return self.window.hi

    def projector(self) -> np.ndarray:
        Q = self.Q
        return Q @ Q.conj().T

    def orthogonality_residual(self) -> float:
        """max |(f, u chi^k)| over basis f and k = 0..D - deg."""
        D, d = self.D, self.inner.degree
        U = multiplication_matrix(self.inner.taylor(D), D)[:, : D - d + 1]
        return float(np.max(np.abs(U.conj().T @ self.Q)))


def model_space_basis(u: RationalInner, D: int) -> ModelSpaceRep:
    """Orthonormal basis of the complement of {u chi^k : k <= D - deg u} in C^{D+1}.

    The basis is canonical: Gram-Schmidt of the projections of 1, z, ...,
    z^{deg-1}, so u = z^d yields the monomials.
    """
    d = u.degree
    if D < 2 * d + 16:
        raise PreconditionError("need D >= 2 deg u + 16", D=D, degree=d)
    U = multiplication_matrix(u.taylor(D), D)[:, : D - d + 1]
    Z = scipy.linalg.null_space(U.conj().T, rcond=tolerances.get("rank"))
    if Z.shape[1] != d:
        raise WindowMismatchError(
            f"complement has dimension {Z.shape[1]}, expected {d}; enlarge D", dim=int(Z.shape[1]), degree=d
        )
    Qm, R = np.linalg.qr(Z @ Z[:d].conj().T)
    phase = np.diag(R) / np.abs(np.diag(R))
    Qm = Qm * np.conj(phase)
    window = IndexWindow.hardy(D)
    basis = [FourierVector(window, Qm[:, k]) for k in range(d)]
    clark = []
    if u.measure is not None:
        clark = [np.sqrt(a) * reproducing_kernel(u, z, D) for z, a in u.measure.atoms]
    return ModelSpaceRep(u, basis, clark, d)


def compressed_shift(rep: ModelSpaceRep) -> MatrixOperator:
    """P_K S restricted to K in ``ortho_basis`` coordinates."""
    Q = rep.Q
    S = np.eye(Q.shape[0], k=-1)
    w = IndexWindow(0, rep.dim - 1)
    return MatrixOperator(w, w, Q.conj().T @ S @ Q)


def compressed_shift_direct(rep: ModelSpaceRep) -> MatrixOperator:
    """Same matrix from chi f - (f, P_{H^2}(u conj chi)) u."""
    Q = rep.Q
    D = rep.D
    ut = rep.inner.taylor(D + 1)
    cols = []
    for k in range(rep.dim):
        f = Q[:, k]
        g = np.concatenate([[0.0], f[:-1]])
        g = g - np.sum(f * np.conj(ut[1 : D + 2])) * ut[: D + 1]
        cols.append(Q.conj().T @ g)
    w = IndexWindow(0, rep.dim - 1)
    return MatrixOperator(w, w, np.column_stack(cols))


def clark_unitary(rep: ModelSpaceRep, sigma: ClarkMeasure) -> MatrixOperator:
    """V_u from atom coordinates (delta_{zeta_n}/sqrt(a_n)) to ``ortho_basis`` coordinates."""
    res = yy0_residual(rep.inner, sigma)
    if res > tolerances.get("reproducing") or len(sigma) != rep.dim:
        raise PreconditionError("measure is not the Clark measure of this inner function", residual=res)
    cols = [np.sqrt(a) * reproducing_kernel(rep.inner, z, rep.D).coeffs for z, a in sigma.atoms]
    V = rep.Q.conj().T @ np.column_stack(cols)
    return MatrixOperator(IndexWindow(0, len(sigma) - 1), IndexWindow(0, rep.dim - 1), V)


def boundary_values(rep: ModelSpaceRep, coords: np.ndarray, zetas: Sequence[complex]) -> np.ndarray:
    """f(zeta) = (f, k_{u,zeta}) for f given in ``ortho_basis`` coordinates."""
    f = rep.Q @ np.asarray(coords)
    return np.array([np.sum(f * np.conj(reproducing_kernel(rep.inner, z, rep.D).coeffs)) for z in zetas])


def conjugation(u: RationalInner, f: np.ndarray) -> np.ndarray:
    """Coefficients of u conj(chi) conj(f) (the antiunitary symmetry of K_u)."""
    D = f.size - 1
    ut = u.taylor(2 * D + 1)
    H = scipy.linalg.hankel(ut[1 : D + 2], ut[D + 1 : 2 * D + 2])
    return H @ np.conj(f)


def multiplier_phi0(u: RationalInner, v: RationalInner) -> Rational:
    """phi_0 = (1 - v)/(1 - u), which is den_u/den_v when the Clark measures share atoms."""
    su = u.measure or clark_measure_of(u)
    sv = v.measure or clark_measure_of(v)
    zu, zv = su.zetas, sv.zetas
    if len(su) != len(sv):
        raise ConstraintError("Clark measures have different supports", inequality="h > 0 sigma_v-a.e.")
    match = np.abs(zu[:, None] - zv[None, :])
    if np.max(np.min(match, axis=1)) > 1e-9:
        raise ConstraintError("Clark measures have different supports", inequality="h > 0 sigma_v-a.e.")
    return Rational(u.denominator, v.denominator, _TransformRatio(su, sv))


def mass_ratios(u: RationalInner, v: RationalInner) -> np.ndarray:
    """h(zeta_n) = a^u_n / a^v_n in the atom order of v's measure."""
    su = u.measure or clark_measure_of(u)
    sv = v.measure or clark_measure_of(v)
    order = np.argmin(np.abs(su.zetas[None, :] - sv.zetas[:, None]), axis=1)
    return su.masses[order] / sv.masses


@dataclass
class MultiplierReport:
    containment_residual: float
    singular_values: np.ndarray
    rank: int
    dim_v: int

    @property
    def smallest(self) -> float:
        return float(self.singular_values[-1])

    @property
    def full_rank(self) -> bool:
        return self.rank == self.dim_v


def multiplier_check(phi0: Rational, rep_u: ModelSpaceRep, rep_v: ModelSpaceRep) -> MultiplierReport:
    """Containment phi0 K_u in K_v and rank of the multiplication matrix K_u -> K_v."""
    if rep_u.D != rep_v.D:
        raise WindowMismatchError("model spaces on different windows", left=rep_u.D, right=rep_v.D)
    D = rep_u.D
    L = multiplication_matrix(phi0.taylor(D), D)
    img = L @ rep_u.Q
    Qv = rep_v.Q
    M = Qv.conj().T @ img
    resid = float(np.max(np.linalg.norm(img - Qv @ M, axis=0)))
    s = singular_values(M)
    return MultiplierReport(resid, s, numerical_rank(M), rep_v.dim)


def lipschitz_phi0_bound(h1: Callable, sigma_v: ClarkMeasure, lip: float = 1.0, sup_h1: float = 2.0) -> float:
    """sup |phi0| <= 2 Lip(h) + sup h for h = h1 / sum a_n h1(zeta_n)."""
    s = float(np.sum(sigma_v.masses * h1(sigma_v.zetas)))
    return (2 * lip + sup_h1) / s


def sup_on_circle(f: Rational, samples: int = 4096) -> float:
    return float(np.max(np.abs(f(circle_points(samples)))))


def recover_c(u: Rational, v: Rational, phi0: Rational, samples: int = CIRCLE_SAMPLES) -> tuple[complex, float]:
    """Constant c with phi0 = c v conj(u) conj(phi0) on the circle, and its sample variance."""
    z = circle_points(samples)
    p = phi0(z)
    vals = p / (v(z) * np.conj(u(z)) * np.conj(p))
    c = complex(np.mean(vals))
    return c, float(np.mean(np.abs(vals - c) ** 2))


def padding_for(*fs: Rational, target: float = 1e-18, cap: int = 1500) -> int:
    """Extra Taylor length so that coefficients beyond it fall below ``target``."""
    r = max(f.decay_radius() for f in fs)
    deg = sum(max(f.numerator.size, f.denominator.size) for f in fs)
    if r <= 0:
        return deg + 16
    if r >= 1:
        return cap
    return int(min(cap, np.ceil(np.log(target) / np.log(r)) + 2 * deg + 16))


def suggest_window(*fs: RationalInner, target: float = 1e-13) -> int:
    """Smallest D >= 2 sum(deg) + 32 with Taylor tails below ``target``."""
    base = 2 * sum(f.degree for f in fs) + 32
    r = max(f.decay_radius() for f in fs)
    if r <= 0:
        return base
    return int(max(base, np.ceil(np.log(target) / np.log(r)) + base))


@dataclass(eq=False)
class TXYResult:
    T: MatrixOperator
    X: MatrixOperator
    Y: MatrixOperator
    c: complex
    c_variance: float
    residuals: dict[str, float]
    interior: int
    padding: int
    defect_rank: int

    def __iter__(self):
        return iter((self.T, self.X, self.Y, self.c))


def build_TXY(u: RationalInner, v: RationalInner, phi0: Rational, D: int) -> TXYResult:
    """Truncations of Y(uh + f) = vh + phi0 f, X(vh + g) = u phi0 h + g and the rank-one perturbation T of S.

    Matrices are assembled on a padded window sized from the coefficient decay
    and compressed to [0, D]; identity residuals are taken from the padded
    products on the interior indices 0..D - deg u - deg v.
    """
    if abs(phi0(0.0)) < 1e-12:
        raise PreconditionError("phi0(0) = 0 makes the rank-one term undefined")
    c, var = recover_c(u, v, phi0)
    if var > tolerances.get("c_variance"):
        raise PreconditionError(f"v conj(u) conj(phi0)/phi0 is not constant (variance {var:.3e})", variance=var)
    pad = padding_for(u, v, phi0)
    n = D + pad
    Lu = multiplication_matrix(u.taylor(n), n)
    Lv = multiplication_matrix(v.taylor(n), n)
    Lp = multiplication_matrix(phi0.taylor(n), n)
    Id = np.eye(n + 1)
    Y = Lv @ Lu.conj().T + Lp @ (Id - Lu @ Lu.conj().T)
    X = Lu @ Lp @ Lv.conj().T + Id - Lv @ Lv.conj().T
    vt = v.taylor(n + 1)
    a = vt[: n + 1] - Lp @ u.taylor(n)
    lam = 1 / (np.conj(c) * phi0(0.0))
    w = lam * vt[1 : n + 2]
    S = np.eye(n + 1, k=-1)
    T = S + np.outer(a, np.conj(w))
    m = D - u.degree - v.degree
    if m < 0:
        raise PreconditionError("window too small for the interior convention", D=D)
    inner = slice(0, m + 1)
    residuals = {
        "YS-TY": float(np.max(np.abs((Y @ S - T @ Y)[inner, inner]))),
        "XT-SX": float(np.max(np.abs((X @ T - S @ X)[inner, inner]))),
        "XY-phi0(S)": float(np.max(np.abs((X @ Y - Lp)[inner, inner]))),
    }
    win = IndexWindow.hardy(D)
    top = slice(0, D + 1)

    def op(A):
        return MatrixOperator(win, win, A[top, top])

    defect_rank = numerical_rank(T[top, top] - S[top, top], rtol=1e-9)
    return TXYResult(op(T), op(X), op(Y), c, var, residuals, m, pad, defect_rank)


def smallest_singular_ladder(u: RationalInner, v: RationalInner, phi0: Rational, Ds: Sequence[int]) -> list[tuple[int, float, float]]:
    """(D, sigma_min(X_D), sigma_min(Y_D)) for an injectivity probe."""
    out = []
    for D in Ds:
        r = build_TXY(u, v, phi0, D)
        out.append((D, float(singular_values(r.X)[-1]), float(singular_values(r.Y)[-1])))
    return out


def dirac_example_pair(
    h1: Callable, zetas: Sequence[complex], masses: Sequence[float]
) -> tuple[ClarkMeasure, ClarkMeasure]:
    """sigma_v = sum a_n delta_{zeta_n} and sigma_u proportional to sum a_n h1(zeta_n) delta_{zeta_n}."""
    z = np.asarray(zetas, dtype=complex)
    a = np.asarray(masses, dtype=float)
    if abs(a.sum() - 1) > 1e-12:
        raise PreconditionError("masses must sum to one", total=float(a.sum()))
    h = np.asarray(h1(z), dtype=float)
    if np.any(h <= 0):
        bad = int(np.nonzero(h <= 0)[0][0])
        raise PreconditionError(f"h1 vanishes at atom {bad}", index=bad)
    sigma_v = ClarkMeasure(list(zip(z.tolist(), a.tolist())))
    sigma_u = ClarkMeasure(list(zip(z.tolist(), (a * h / np.sum(a * h)).tolist())))
    return sigma_v, sigma_u


def distance_to_one(z):
    return np.abs(1 - np.asarray(z))


def dirac_atoms(n_atoms: int) -> tuple[np.ndarray, np.ndarray]:
    """zeta_n = exp(i pi/(2n)) accumulating at 1 with a_n proportional to 1/n^2."""
    n = np.arange(1, n_atoms + 1, dtype=float)
    a = 1 / n**2
    return np.exp(1j * np.pi / (2 * n)), a / a.sum()


def divergence_partial_sums(h1: Callable, N: int) -> np.ndarray:
    """Partial sums of a_n / h1(zeta_n) with a_n = 6/(pi^2 n^2) for the atoms of ``dirac_atoms``."""
    n = np.arange(1, N + 1, dtype=float)
    a = 6 / (np.pi**2 * n**2)
    return np.cumsum(a / h1(np.exp(1j * np.pi / (2 * n))))


def spread_atoms(
    count: int, rng: np.random.Generator, jitter: float = 0.1, mass_range: tuple[float, float] = (0.8, 1.2)
) -> ClarkMeasure:
    """Nearly equispaced atoms with masses drawn from ``mass_range`` before normalization.

    Spread atoms keep the poles of u well away from the circle, so Taylor
    coefficients decay fast enough for small windows.
    """
    base = 2 * np.pi * (np.arange(count) + rng.uniform(-jitter, jitter, count)) / count
    theta = base + rng.uniform(0, 2 * np.pi)
    masses = rng.uniform(*mass_range, count)
    return ClarkMeasure(list(zip(np.exp(1j * theta).tolist(), masses.tolist())))


def reweighted(sigma: ClarkMeasure, h: Sequence[float]) -> ClarkMeasure:
    return ClarkMeasure([(z, a * float(x)) for (z, a), x in zip(sigma.atoms, h)])
