import time

import pytest
from hypothesis import settings

from pispectra.line import LineParams, SectionParams, section_params

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

acceptance_key = pytest.StashKey[list]()
start_key = pytest.StashKey[float]()

SUITE_BUDGET_S = 120.0


def pytest_configure(config):
    config.stash[acceptance_key] = []
    config.stash[start_key] = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(acceptance_key, [])
    elapsed = time.perf_counter() - config.stash[start_key]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
    terminalreporter.write_line(
        f"[{'PASS' if elapsed < SUITE_BUDGET_S else 'FAIL'}] full suite runtime {elapsed:.1f} s "
        f"(budget {SUITE_BUDGET_S:.0f} s)"
    )


@pytest.fixture
def acceptance_log(request):
    """Record a one-line verdict per criterion; fail the test on FAIL."""
    log = request.config.stash[acceptance_key]

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        log.append(line)
        print(line)
        assert passed, line

    return record


# 110 kV line: 0.02 Ohm/km, 0.5 mH/km, 0.4 uF/km, lossless shunt, 100 km in 6 sections
@pytest.fixture
def line110():
    return LineParams(0.02, 0.5e-3, 0.4e-6, 0.0, 100.0)


@pytest.fixture
def sec6(line110):
    return section_params(line110, 6)


@pytest.fixture
def unit_lossless():
    return SectionParams(R=0.0, L=1.0, C=1.0, G=0.0)

