import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from costdesign.model import DesignInstance

settings.register_profile(
    "default", deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

EX1_F = np.array([[1.0, 0.0], [1.0, 1.0]])


def example1(c1: float, c2: float) -> DesignInstance:
    return DesignInstance(EX1_F, np.array([c1, c2]))


def small_mixed_instance(seed: int, n: int = 6, m: int = 2,
                         with_zero: bool = True) -> DesignInstance:
    """Random instance with at least one high- and one low-cost point."""
    rng = np.random.default_rng(seed)
    while True:
        F = rng.standard_normal((n, m))
        if np.linalg.matrix_rank(F) == m:
            break
    costs = rng.uniform(0.1, 2.5, size=n)
    costs[0] = rng.uniform(1.2, 2.5)
    costs[1] = rng.uniform(0.1, 0.8)
    if with_zero and n > 2:
        costs[2] = 1.0
    return DesignInstance(F, costs)


def random_feasible_design(part, rng) -> np.ndarray:
    """Random strictly positive point of the equality polytope."""
    lam = rng.dirichlet(np.ones(part.n_tilde))
    w = np.zeros(part.n)
    k = 0
    for xp, dp in zip(part.plus, part.delta_plus):
        for xm, dm in zip(part.minus, part.delta_minus):
            w[xp] += lam[k] * dm / (dp + dm)
            w[xm] += lam[k] * dp / (dp + dm)
            k += 1
    w[part.zero] += lam[k:]
    return w


@pytest.fixture
def ex1_mixed():
    return example1(0.5, 1.8)


@pytest.fixture
def three_point():
    # high-cost a (delta 0.5), low-cost b (delta 0.5), unit-cost z
    F = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return DesignInstance(F, np.array([1.5, 0.5, 1.0]), ("a", "b", "z"))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LOG = []


def record_acceptance(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LOG.append((criterion, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE_LOG, key=lambda r: r[0]):
        terminalreporter.write_line(
            f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
