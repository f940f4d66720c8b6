import numpy as np
import pytest

from aisbn.network import BayesNet, NodeSpec


def sprinkler() -> BayesNet:
    return BayesNet([
        NodeSpec("Cloudy", ("no", "yes"), (), [0.5, 0.5]),
        NodeSpec("Sprinkler", ("off", "on"), ("Cloudy",), [[0.5, 0.5], [0.9, 0.1]]),
        NodeSpec("Rain", ("no", "yes"), ("Cloudy",), [[0.8, 0.2], [0.2, 0.8]]),
        NodeSpec("WetGrass", ("dry", "wet"), ("Sprinkler", "Rain"),
                 [[1.0, 0.0], [0.1, 0.9], [0.1, 0.9], [0.01, 0.99]]),
    ])


def three_state() -> BayesNet:
    # ternary root, binary child with a structural zero
    return BayesNet([
        NodeSpec("A", ("a0", "a1", "a2"), (), [0.2, 0.3, 0.5]),
        NodeSpec("B", ("b0", "b1"), ("A",), [[1.0, 0.0], [0.4, 0.6], [0.7, 0.3]]),
        NodeSpec("C", ("c0", "c1", "c2"), ("A", "B"),
                 [[0.1, 0.2, 0.7], [1 / 3, 1 / 3, 1 / 3], [0.5, 0.5, 0.0],
                  [0.0, 0.25, 0.75], [0.6, 0.3, 0.1], [0.05, 0.05, 0.9]]),
    ])


@pytest.fixture
def sprinkler_net():
    return sprinkler()


@pytest.fixture
def ternary_net():
    return three_state()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
