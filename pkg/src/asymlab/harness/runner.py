"""Run an ExperimentSpec: rungs in a worker pool, one collector writing CSV and the manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .. import __version__, tolerances
from .config import ExperimentSpec
from .experiments import KINDS

MANIFEST = "manifest.json"


@dataclass
class RunManifest:
    spec: dict
    tool_version: str
    rung_wall_time: dict[str, float]
    tolerances: dict[str, float]
    verdicts: dict[str, Any]
    files: dict[str, str]

    def to_json(self) -> str:
        payload = {
            "files": self.files,
            "rung_wall_time_s": self.rung_wall_time,
            "spec": self.spec,
            "tolerances": self.tolerances,
            "tool_version": self.tool_version,
            "verdicts": self.verdicts,
        }
        return json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n"


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17e")
    return str(v)


def render_csv(columns: list[tuple[str, str]], rows: list[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow([f"{name}[{unit}]" for name, unit in columns])
    for row in rows:
        writer.writerow([format_value(row[name]) for name, _ in columns])
    return buf.getvalue().encode()


def _run_rung(kind: str, params: dict, n: int, tol: dict[str, float]):
    with tolerances.overridden(tol):
        start = time.perf_counter()
        out = KINDS[kind].rung(params, n)
        return out, time.perf_counter() - start


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return v.item()
    return v


def run(spec: ExperimentSpec, jobs: int = 1, tol: dict[str, float] | None = None) -> RunManifest:
    tol = dict(tol or {})
    kind = KINDS[spec.kind]
    with tolerances.overridden(tol) as table:
        if jobs > 1 and len(spec.truncation_ladder) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_run_rung, spec.kind, spec.parameters, n, tol) for n in spec.truncation_ladder]
                results = [f.result() for f in futures]
        else:
            results = [_run_rung(spec.kind, spec.parameters, n, tol) for n in spec.truncation_ladder]
        rungs = [r for r, _ in results]
        verdicts, extra = kind.summarize(spec.parameters, spec.truncation_ladder, rungs)

    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    tables = {name: [row for r in rungs for row in r.get(name, [])] for name in kind.columns}
    columns = dict(kind.columns)
    for name, rows in extra.items():
        tables[name] = rows
        columns[name] = kind.summary_columns[name]
    for name in sorted(tables):
        data = render_csv(columns[name], tables[name])
        fname = f"{name}.csv"
        (out / fname).write_bytes(data)
        files[fname] = hashlib.sha256(data).hexdigest()
    manifest = RunManifest(
        spec=spec.echo(),
        tool_version=__version__,
        rung_wall_time={str(n): round(t, 6) for n, (_, t) in zip(spec.truncation_ladder, results)},
        tolerances=table,
        verdicts=_jsonable(verdicts),
        files=files,
    )
    (out / MANIFEST).write_text(manifest.to_json())
    return manifest


def verify_manifest(directory: str | Path) -> dict[str, bool]:
    d = Path(directory)
    data = json.loads((d / MANIFEST).read_text())
    return {
        name: hashlib.sha256((d / name).read_bytes()).hexdigest() == digest for name, digest in data["files"].items()
    }
