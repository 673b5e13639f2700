"""Experiment spec files: INI text with an [experiment] and a [parameters] section."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


class SchemaError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentSpec:
    name: str
    kind: str
    parameters: dict[str, Any]
    truncation_ladder: list[int]
    output_dir: Path
    raw_parameters: dict[str, str] = field(default_factory=dict, repr=False)

    def echo(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "parameters": {k: self.parameters[k] for k in sorted(self.parameters)},
            "truncation_ladder": list(self.truncation_ladder),
            "output_dir": str(self.output_dir),
        }


def _parse_ladder(text: str) -> list[int]:
    items = [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]
    if not items:
        raise SchemaError("ladder", "ladder is empty")
    try:
        ladder = [int(t) for t in items]
    except ValueError as exc:
        raise SchemaError("ladder", f"not an integer list: {text!r}") from exc
    if any(n <= 0 for n in ladder):
        raise SchemaError("ladder", "rungs must be positive")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise SchemaError("ladder", "rungs must be strictly increasing")
    return ladder


def parse_spec_text(text: str, source: str = "<string>") -> ExperimentSpec:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise SchemaError("file", str(exc).splitlines()[0]) from exc
    if not cp.has_section("experiment"):
        raise SchemaError("experiment", "missing [experiment] section")
    ex = cp["experiment"]
    for key in ("name", "kind", "ladder"):
        if not ex.get(key, "").strip():
            raise SchemaError(key, "missing or empty")
    raw = dict(cp["parameters"]) if cp.has_section("parameters") else {}
    from .experiments import KINDS

    kind = ex["kind"].strip()
    if kind not in KINDS:
        raise SchemaError("kind", f"unknown kind {kind!r}; known: {', '.join(sorted(KINDS))}")
    ladder = _parse_ladder(ex["ladder"])
    params = KINDS[kind].validate(raw, ladder)
    out = Path(ex.get("output_dir", "").strip() or f"runs/{ex['name'].strip()}")
    return ExperimentSpec(ex["name"].strip(), kind, params, ladder, out, raw)


def load_spec(path: str | Path) -> ExperimentSpec:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise SchemaError("file", f"cannot read {p}: {exc.strerror}") from exc
    return parse_spec_text(text, str(p))


def parse_tolerance_flags(items: list[str] | None) -> dict[str, float]:
    from .. import tolerances

    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise SchemaError("--tol", f"expected name=value, got {item!r}")
        name = name.strip()
        if name not in tolerances.DEFAULTS:
            raise SchemaError("--tol", f"unknown tolerance {name!r}")
        try:
            v = float(value)
        except ValueError as exc:
            raise SchemaError("--tol", f"{name} is not a number: {value!r}") from exc
        if not v > 0:
            raise SchemaError("--tol", f"{name} must be positive")
        out[name] = v
    return out
