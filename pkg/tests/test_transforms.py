import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relikit import Marginal, cholesky_lower, u_to_x, x_to_u

from conftest import random_correlation_matrix

NORMALS = [Marginal.normal(7.0, 1.5), Marginal.normal(10.0, 2.5)]
FACTOR_06 = cholesky_lower([[1.0, 0.6], [0.6, 1.0]])
FACTOR_ID = cholesky_lower(np.eye(2))


def test_means_map_to_origin():
    u = x_to_u([7.0, 10.0], NORMALS, FACTOR_06)
    assert u == pytest.approx([0.0, 0.0], abs=1e-14)


def test_uncorrelated_componentwise_standardization():
    u = x_to_u([8.5, 12.5], NORMALS, FACTOR_ID)
    assert u == pytest.approx([1.0, 1.0])


def test_correlated_forward_substitution():
    # z = [1, 0]; solving L u = z with L = [[1,0],[0.6,0.8]] gives [1, -0.75]
    u = x_to_u([8.5, 10.0], NORMALS, FACTOR_06)
    assert u == pytest.approx([1.0, -0.75])


def test_u_to_x_inverse_of_example():
    x = u_to_x([1.0, -0.75], NORMALS, FACTOR_06)
    assert x == pytest.approx([8.5, 10.0])


def test_origin_maps_to_means():
    assert u_to_x([0.0, 0.0], NORMALS, FACTOR_06) == pytest.approx([7.0, 10.0])


def test_round_trip_on_batch_of_random_points():
    rng = np.random.default_rng(11)
    x = 7.0 + rng.standard_normal((100, 2)) * 2.0
    back = u_to_x(x_to_u(x, NORMALS, FACTOR_06), NORMALS, FACTOR_06)
    assert np.max(np.abs(back - x)) <= 1e-10


def test_lognormal_domain_error():
    marginals = [Marginal.lognormal(5.0, 2.0), Marginal.normal(0.0, 1.0)]
    with pytest.raises(ValueError):
        x_to_u([-1.0, 0.0], marginals, FACTOR_ID)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        x_to_u([1.0, 2.0, 3.0], NORMALS, FACTOR_06)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=2, max_value=6),
    st.integers(min_value=0, max_value=2**31),
)
def test_round_trip_random_problems(dim, seed):
    rng = np.random.default_rng(seed)
    corr = random_correlation_matrix(rng, dim)
    marginals = []
    for i in range(dim):
        mean = float(rng.uniform(1.0, 10.0))
        sd = float(rng.uniform(0.2, 3.0))
        if i % 2 == 0:
            marginals.append(Marginal.normal(mean, sd))
        else:
            marginals.append(Marginal.lognormal(mean, sd))
    factor = corr.factor()
    u = rng.standard_normal((20, dim)) * 1.5
    x = u_to_x(u, marginals, factor)
    back = x_to_u(x, marginals, factor)
    assert np.max(np.abs(back - u)) <= 1e-9
