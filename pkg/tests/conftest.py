import sys

import numpy as np
import pytest

from nbodybounds import doubling, graph
from nbodybounds.sigma import build_sigma


@pytest.fixture(scope="session")
def family():
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = doubling.build_family(n)
        return cache[n]
    return get


@pytest.fixture(scope="session")
def sigma_graph():
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = graph.build_graph(build_sigma(n).support)
        return cache[n]
    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
