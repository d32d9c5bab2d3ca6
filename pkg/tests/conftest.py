import numpy as np
import pytest

from macrobell import experiment

MILLION = 10**6

_acceptance_lines = []


@pytest.fixture(scope="session")
def million_ensemble():
    cfg = experiment.ExperimentConfig(trials=MILLION, seed=20240601)
    return experiment.generate_ensemble(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def random_unit_vectors(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
