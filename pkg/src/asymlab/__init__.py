"""Numerical lab for isometric and unitary asymptotes of truncated operator families."""

__version__ = "0.1.0"

from .errors import (
    AsymlabError,
    ConstraintError,
    NonFiniteError,
    NotPowerBoundedError,
    PreconditionError,
    RankDeficientError,
    WindowMismatchError,
)
from .linalg import FourierVector, IndexWindow, MatrixOperator

__all__ = [
    "AsymlabError",
    "ConstraintError",
    "FourierVector",
    "IndexWindow",
    "MatrixOperator",
    "NonFiniteError",
    "NotPowerBoundedError",
    "PreconditionError",
    "RankDeficientError",
    "WindowMismatchError",
    "__version__",
]
