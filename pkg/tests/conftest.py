import numpy as np
import pytest

from relikit import CorrelationMatrix, Marginal, ReliabilityProblem


@pytest.fixture(scope="session")
def bench_case1() -> ReliabilityProblem:
    """Correlated two-variable cubic benchmark, means [7, 10]."""
    return ReliabilityProblem.from_text(
        "x1^2 + x2^3 - 50",
        [Marginal.normal(7.0, 1.5), Marginal.normal(10.0, 2.5)],
        [[1.0, 0.6], [0.6, 1.0]],
    )


@pytest.fixture(scope="session")
def bench_case2() -> ReliabilityProblem:
    """Same limit state with shifted means [8, 12]."""
    return ReliabilityProblem.from_text(
        "x1^2 + x2^3 - 50",
        [Marginal.normal(8.0, 1.5), Marginal.normal(12.0, 2.5)],
        [[1.0, 0.6], [0.6, 1.0]],
    )


def circle_problem(radius: float) -> ReliabilityProblem:
    """Independent standard normals failing outside a circle of given radius."""
    return ReliabilityProblem.from_text(
        f"{radius} - sqrt(x1^2 + x2^2)",
        [Marginal.normal(0.0, 1.0), Marginal.normal(0.0, 1.0)],
    )


@pytest.fixture(scope="session")
def circle4() -> ReliabilityProblem:
    return circle_problem(4.0)


def random_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim + 2))
    return a @ a.T / (dim + 2) + 0.1 * np.eye(dim)


def random_correlation_matrix(rng: np.random.Generator, dim: int) -> CorrelationMatrix:
    spd = random_spd(rng, dim)
    d = 1.0 / np.sqrt(np.diag(spd))
    corr = spd * np.outer(d, d)
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(0.5 * (corr + corr.T))
