import numpy as np
import pytest

from pchnet.placement import PlacementProblem


def random_problem(rng, clients, candidates, omega=None, integer=False, uniform_delta=False):
    """Random symmetric cost instance; integer costs keep comparisons exact."""

    def sym(scale):
        if integer:
            m = rng.integers(0, scale + 1, size=(candidates, candidates)).astype(float)
        else:
            m = rng.uniform(0, scale, size=(candidates, candidates))
        m = np.triu(m, 1)
        return m + m.T

    if integer:
        zeta = rng.integers(0, 20, size=(clients, candidates)).astype(float)
    else:
        zeta = rng.uniform(0, 1, size=(clients, candidates))
    delta = sym(5 if integer else 0.2)
    if uniform_delta:
        c = float(rng.integers(0, 5)) if integer else float(rng.uniform(0, 0.2))
        delta = c * (1 - np.eye(candidates))
    epsilon = sym(10 if integer else 0.5)
    if omega is None:
        omega = float(rng.integers(0, 4)) if integer else float(rng.uniform(0, 2))
    return PlacementProblem(zeta, delta, epsilon, omega)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
