import numpy as np
import pytest

from zenoest import eigenbasis, two_level_model

ACCEPTANCE_LINES = []


@pytest.fixture
def basis():
    return eigenbasis()


@pytest.fixture
def resonant():
    return two_level_model(1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_density(rng, dim=2):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real
