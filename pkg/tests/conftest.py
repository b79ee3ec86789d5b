import pytest

from hetwsn.heterogeneity import HeterogeneityConfig
from hetwsn.radio import RadioParams


class ScriptedStream:
    """Stand-in for RandomStream that replays fixed draws."""

    def __init__(self, draws, default=0.999):
        self.draws = list(draws)
        self.default = default
        self.used = 0

    def random(self):
        self.used += 1
        return self.draws.pop(0) if self.draws else self.default


@pytest.fixture
def radio():
    return RadioParams()


@pytest.fixture
def case1():
    return HeterogeneityConfig(n=100, m=0.5, m0=0.4, alpha=1.0, beta=2.0, e0=0.5, p_opt=0.1)


@pytest.fixture
def case2():
    return HeterogeneityConfig(n=100, m=0.5, m0=0.4, alpha=1.5, beta=3.0, e0=0.5, p_opt=0.1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
