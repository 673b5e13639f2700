import numpy as np
import pytest

from asymlab import tolerances

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, title: str, checks: dict[str, bool], detail: str = "") -> bool:
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    line = f"ACCEPTANCE {criterion} [{'PASS' if ok else 'FAIL'}] {title}"
    if failed:
        line += " | failed: " + ", ".join(failed)
    if detail:
        line += " | " + detail
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture
def acceptance():
    return record


@pytest.fixture(autouse=True)
def _fresh_tolerances():
    tolerances.reset()
    yield
    tolerances.reset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def builtin_runs(tmp_path_factory):
    """Every built-in experiment run twice through the CLI: {name: (dir_a, dir_b, exit codes, seconds)}."""
    import time

    from asymlab.harness import catalog
    from asymlab.harness.cli import main

    root = tmp_path_factory.mktemp("builtins")
    out = {}
    for e in catalog.list_experiments():
        a, b = root / e.name / "a", root / e.name / "b"
        start = time.perf_counter()
        codes = (main(["run", e.name, "--out", str(a)]), main(["run", e.name, "--out", str(b), "--jobs", "2"]))
        out[e.name] = (a, b, codes, time.perf_counter() - start)
    return out
