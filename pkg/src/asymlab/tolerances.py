"""Central tolerance table.

Exact algebraic identities are checked at ``algebraic``; anything that is an
estimate of a limit (Cesaro averages, iterative singular values) uses
``iterative``.  Every public function that takes a ``tol`` falls back to this
table, and the CLI ``--tol name=value`` flag overrides entries per run.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from contextlib import contextmanager

DEFAULTS: dict[str, float] = {
    "algebraic": 1e-10,
    "iterative": 1e-8,
    "biorthogonality": 1e-9,
    "unimodular": 1e-9,
    "inner_at_zero": 1e-12,
    "reproducing": 1e-8,
    "multiplier": 1e-8,
    "intertwining": 1e-8,
    "c_variance": 1e-8,
    "gram_limit": 1e-6,
    "c_class": 1e-2,
    "rank": 1e-10,
    "power_cap": 1e6,
    "slope": 0.05,
    "dependence": 1e-12,
}

_active: dict[str, float] = dict(DEFAULTS)


def get(name: str) -> float:
    return _active[name]


def table() -> dict[str, float]:
    return dict(sorted(_active.items()))


def set_tolerance(name: str, value: float) -> None:
    if name not in DEFAULTS:
        raise KeyError(f"unknown tolerance {name!r}; known: {sorted(DEFAULTS)}")
    if not value > 0:
        raise ValueError(f"tolerance {name!r} must be positive, got {value}")
    _active[name] = float(value)


def reset() -> None:
    _active.clear()
    _active.update(DEFAULTS)


@contextmanager
def overridden(overrides: Mapping[str, float]) -> Iterator[dict[str, float]]:
    saved = dict(_active)
    try:
        for k, v in overrides.items():
            set_tolerance(k, v)
        yield table()
    finally:
        _active.clear()
        _active.update(saved)
