import contextlib
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

RESULTS: list[tuple[str, bool, str]] = []


class Criterion:
    def __init__(self, name: str, budget: float | None):
        self.name = name
        self.budget = budget
        self.detail = ""

    def note(self, text: str) -> None:
        self.detail = text


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion as PASS or FAIL."""

    @contextlib.contextmanager
    def run(name: str, budget: float | None = None):
        c = Criterion(name, budget)
        start = time.perf_counter()
        try:
            yield c
            elapsed = time.perf_counter() - start
            if budget is not None:
                assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
        except BaseException as exc:
            RESULTS.append((name, False, f"{type(exc).__name__}: {exc}"[:200]))
            print(f"FAIL {name}: {exc}")
            raise
        else:
            msg = f"{c.detail} ({elapsed:.2f}s)".strip()
            RESULTS.append((name, True, msg))
            print(f"PASS {name}: {msg}")

    return run


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
