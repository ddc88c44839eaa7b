import functools

import pytest

from slitloewner import bangbang, fixtures
from slitloewner.lmr_oracle import LmrOracle

RESOLUTION = 256


@functools.lru_cache(maxsize=None)
def oracle_for(name, resolution=RESOLUTION, headroom=None):
    system = fixtures.get(name)
    target = None if headroom is None else headroom * LmrOracle(system, resolution=resolution,
                                                                 extend=False).L
    return LmrOracle(system, resolution=resolution, extension_target=target)


@functools.lru_cache(maxsize=None)
def solution_for(name, schedule="dyadic", max_level=6, headroom=None):
    oracle = oracle_for(name, headroom=headroom)
    return bangbang.construct(oracle, max_level=max_level, min_level=max_level, schedule=schedule)


@pytest.fixture(scope="session")
def asym_oracle():
    return oracle_for("asymmetric")


ACCEPTANCE_LINES = []


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
