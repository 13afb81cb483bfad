import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._acceptance = []


@pytest.fixture
def record(request):
    """record(number, ok, detail) prints one PASS/FAIL line and keeps it for the summary."""
    def _rec(num: int, ok: bool, detail: str) -> bool:
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line, flush=True)
        request.config._acceptance.append((num, line))
        return ok
    return _rec


def pytest_terminal_summary(terminalreporter, config):
    rows = sorted(getattr(config, "_acceptance", []))
    if rows:
        terminalreporter.section("acceptance criteria")
        for _, line in rows:
            terminalreporter.write_line(line)
