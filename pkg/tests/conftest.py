import json
from pathlib import Path

import pytest

GOLDEN_PATH = Path(__file__).with_name("golden.json")


@pytest.fixture(scope="session")
def golden():
    return json.loads(GOLDEN_PATH.read_text())


def rel(a, b):
    return abs(a - b) / abs(b)


ACCEPTANCE_RESULTS = []


def record_acceptance(number, title, ok, detail):
    ACCEPTANCE_RESULTS.append((number, title, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {title} ({detail})")
