"""Exception hierarchy.

Every error raised by the numerical modules derives from ``AsymlabError`` and
carries a ``payload`` dict so the experiment runner can serialize it.
"""

from __future__ import annotations

from typing import Any


class AsymlabError(Exception):
    def __init__(self, message: str, **payload: Any):
        super().__init__(message)
        self.payload = {"error": type(self).__name__, "message": message, **payload}


class WindowMismatchError(AsymlabError, ValueError):
    pass


class NonFiniteError(AsymlabError, ValueError):
    pass


class RankDeficientError(AsymlabError, ValueError):
    pass


class NotPowerBoundedError(AsymlabError, ArithmeticError):
    pass


class PreconditionError(AsymlabError, ValueError):
    """An input violates a hypothesis the construction relies on."""


class ConstraintError(PreconditionError):
    pass
