import math

import numpy as np
import pytest

from relikit import (
    CrudeMonteCarlo,
    EvaluationDomainError,
    Marginal,
    ReliabilityProblem,
    crude_mcs,
    std_normal_inv_cdf,
)

from conftest import circle_problem

CIRCLE_PF = math.exp(-8.0)  # exceedance probability of radius 4 for 2D standard normals


def test_circle_estimate_within_four_standard_errors(circle4):
    res = crude_mcs(circle4, 300_000, seed=21)
    assert abs(res.pf_hat - CIRCLE_PF) <= 4.0 * math.sqrt(CIRCLE_PF / 300_000)


def test_result_invariants(circle4):
    res = crude_mcs(circle4, 200_000, seed=3)
    assert res.pf_hat == res.n_failures / res.n_samples
    assert res.std_error == pytest.approx(
        math.sqrt(res.pf_hat * (1 - res.pf_hat) / res.n_samples)
    )
    assert res.ci95[0] <= res.pf_hat <= res.ci95[1]
    assert res.beta_hat == pytest.approx(-std_normal_inv_cdf(res.pf_hat))


def test_always_failing_limit_state():
    problem = ReliabilityProblem.from_text("-1", [Marginal.normal(0.0, 1.0)])
    res = crude_mcs(problem, 1000, seed=0)
    assert res.pf_hat == 1.0
    assert res.n_failures == 1000
    assert res.beta_hat is None


def test_never_failing_limit_state():
    problem = ReliabilityProblem.from_text("1", [Marginal.normal(0.0, 1.0)])
    res = crude_mcs(problem, 1000, seed=0)
    assert res.pf_hat == 0.0
    assert res.beta_hat is None


def test_fixed_seed_reproducible(circle4):
    a = crude_mcs(circle4, 150_000, seed=9)
    b = crude_mcs(circle4, 150_000, seed=9)
    assert a == b
    c = crude_mcs(circle4, 150_000, seed=10)
    assert c.n_failures != a.n_failures or c.pf_hat != a.pf_hat


def test_thread_count_does_not_change_result(circle4):
    # chunk substreams make the count independent of worker scheduling
    seq = crude_mcs(circle4, 400_000, seed=5, threads=1)
    par = crude_mcs(circle4, 400_000, seed=5, threads=4)
    assert seq == par


def test_count_extends_consistently_across_chunks(circle4):
    # sample i depends only on (seed, i): growing the budget by whole chunks
    # preserves the failures observed in the shared prefix
    from relikit.mcs import DRAW_CHUNK

    small = crude_mcs(circle4, DRAW_CHUNK, seed=5)
    large = crude_mcs(circle4, 2 * DRAW_CHUNK, seed=5)
    prefix_failures_small = small.n_failures
    # recount the first chunk inside the larger run
    from relikit.mcs import _chunk_failures

    assert _chunk_failures(circle4, 5, 0, DRAW_CHUNK) == prefix_failures_small
    assert large.n_failures >= prefix_failures_small


def test_binomial_coverage_over_20_seeds(circle4):
    inside = 0
    for seed in range(20):
        res = crude_mcs(circle4, 100_000, seed=seed)
        if res.ci95[0] <= CIRCLE_PF <= res.ci95[1]:
            inside += 1
    assert inside >= 17


def test_correlated_case_with_known_benchmark(bench_case1):
    res = crude_mcs(bench_case1, 400_000, seed=13)
    assert res.pf_hat == pytest.approx(2.87e-3, rel=0.1)
    assert res.beta_hat == pytest.approx(2.76, abs=0.05)


def test_evaluation_error_reports_sample_index():
    problem = ReliabilityProblem.from_text("log(x1)", [Marginal.normal(0.0, 1.0)])
    with pytest.raises(EvaluationDomainError, match="sample "):
        crude_mcs(problem, 1000, seed=0)


def test_argument_validation(circle4):
    with pytest.raises(ValueError):
        crude_mcs(circle4, 0, seed=0)
    with pytest.raises(ValueError):
        crude_mcs(circle4, 100, seed=0, threads=0)
    with pytest.raises(ValueError):
        crude_mcs(circle4, 100, seed=-1)


def test_estimator_wrapper(circle4):
    est = CrudeMonteCarlo(n_samples=50_000, seed=2)
    res = est.run(circle4)
    assert res == crude_mcs(circle4, 50_000, seed=2)
    assert est.get_params()["n_samples"] == 50_000
