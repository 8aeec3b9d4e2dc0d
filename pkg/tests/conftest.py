import time

import numpy as np
import pytest

from ineqflow.experiment import simulate
from ineqflow.presets import preset

# filled by test_acceptance; printed after the run
ACCEPTANCE = {}


def record(number, title, passed, detail=""):
    # parametrized criteria report once per case; merge them into one line
    if number in ACCEPTANCE:
        _, prev_ok, prev_detail = ACCEPTANCE[number]
        passed = prev_ok and passed
        detail = f"{prev_detail}; {detail}"
    ACCEPTANCE[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}" + (f" -- {detail}" if detail else ""))


@pytest.fixture(scope="session")
def preset_runs():
    """Full-horizon preset traces, computed once per session."""
    cache = {}

    def get(name):
        if name not in cache:
            config = preset(name)
            start = time.perf_counter()
            trace = simulate(config)
            cache[name] = (config, trace, time.perf_counter() - start)
        return cache[name]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
