"""Rational functions p/q with ascending complex coefficient arrays.

Polynomial arithmetic is numpy.polynomial; Taylor expansion is the IIR
recursion of scipy.signal.lfilter, which is stable whenever q has no zeros in
the closed disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import numpy.polynomial.polynomial as P
import scipy.signal

from .errors import PreconditionError


def trim(c: np.ndarray, rtol: float = 1e-14) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > rtol * scale)[0]
    return c[: keep[-1] + 1].copy()


def series(num: np.ndarray, den: np.ndarray, D: int) -> np.ndarray:
    """Taylor coefficients 0..D of num/den (den(0) != 0)."""
    den = np.asarray(den, dtype=complex)
    if den[0] == 0:
        raise PreconditionError("denominator vanishes at the origin")
    impulse = np.zeros(D + 1, dtype=complex)
    impulse[0] = 1.0
    return scipy.signal.lfilter(np.asarray(num, dtype=complex), den, impulse)


@dataclass(frozen=True, eq=False)
class Rational:
    """p/q; ``evaluator`` optionally gives a better conditioned pointwise formula for the same function."""

    numerator: np.ndarray
    denominator: np.ndarray
    evaluator: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "numerator", np.asarray(self.numerator, dtype=complex))
        object.__setattr__(self, "denominator", trim(self.denominator))
        if not np.any(self.denominator):
            raise PreconditionError("zero denominator")

    def __call__(self, z):
        if self.evaluator is not None:
            return self.evaluator(z)
        return self.horner(z)

    def horner(self, z):
        return P.polyval(z, self.numerator) / P.polyval(z, self.denominator)

    def coefficient_consistency(self, radius: float = 0.5, samples: int = 64) -> float:
        """max |coefficient form - evaluator| on an interior circle (0 without an evaluator)."""
        if self.evaluator is None:
            return 0.0
        z = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
        return float(np.max(np.abs(self.horner(z) - self.evaluator(z))))

    def derivative(self, z):
        p, q = self.numerator, self.denominator
        qz = P.polyval(z, q)
        return (P.polyval(z, P.polyder(p)) * qz - P.polyval(z, p) * P.polyval(z, P.polyder(q))) / qz**2

    def taylor(self, D: int) -> np.ndarray:
        return series(self.numerator, self.denominator, D)

    def poles(self) -> np.ndarray:
        q = self.denominator
        return P.polyroots(q) if q.size > 1 else np.zeros(0, dtype=complex)

    def decay_radius(self) -> float:
        """Geometric rate of Taylor coefficient decay (largest 1/|pole|, 0 for polynomials)."""
        p = self.poles()
        return float(np.max(1 / np.abs(p))) if p.size else 0.0
