import functools

import pytest

from greechie.diagram import parse_diagram
from greechie.generate import GenerationConfig, generate


@functools.lru_cache(maxsize=None)
def diagrams(beta):
    return tuple(generate(GenerationConfig(beta)))


def diagrams_upto(beta):
    return [d for b in range(1, beta + 1) for d in diagrams(b)]


@pytest.fixture(scope="session")
def mo2():
    return parse_diagram("12,34.")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
