import numpy as np
import pytest
from sklearn.base import clone

from relikit import (
    CorrelationMatrix,
    FormAnalysis,
    GradientSettings,
    Marginal,
    ReliabilityProblem,
    ZeroGradientError,
    beta_from_pf,
    solve_form,
    std_normal_cdf,
)

from conftest import random_correlation_matrix


def linear_beta_oracle(a, b, means, sds, corr) -> float:
    """Closed-form reliability index for g(x) = a.x + b with normal inputs.

    g is normal with mean a.mu + b and standard deviation ||L^T (a * sd)||,
    so beta is their ratio. Derived independently of the iterative solver.
    """
    a = np.asarray(a, float)
    lower = np.linalg.cholesky(np.asarray(corr, float))
    mean_g = a @ np.asarray(means, float) + b
    sd_g = np.linalg.norm(lower.T @ (a * np.asarray(sds, float)))
    return mean_g / sd_g


class TestBenchmarkCases:
    def test_case1(self, bench_case1):
        res = solve_form(bench_case1)
        assert res.converged
        assert res.beta == pytest.approx(2.74, abs=0.01)
        assert res.pf == pytest.approx(3.07e-3, rel=0.02)
        assert res.iterations == 6

    def test_case2(self, bench_case2):
        res = solve_form(bench_case2)
        assert res.converged
        assert res.beta == pytest.approx(3.56, abs=0.01)
        assert res.pf == pytest.approx(1.83e-4, rel=0.02)
        assert res.iterations == 7

    def test_result_invariants(self, bench_case1):
        res = solve_form(bench_case1)
        assert res.pf == pytest.approx(std_normal_cdf(-res.beta), abs=1e-12)
        assert np.linalg.norm(res.u_star) == pytest.approx(abs(res.beta), abs=1e-6)
        assert np.linalg.norm(res.alpha) == pytest.approx(1.0, abs=1e-10)
        g_mean = bench_case1.g(bench_case1.means)
        assert abs(bench_case1.g(res.x_star)) <= 1e-6 * max(1.0, abs(g_mean))

    def test_alpha_parallel_to_negative_gradient(self, bench_case1):
        from relikit.expressions import gradient

        res = solve_form(bench_case1)
        d_g = gradient(bench_case1.limit_state, res.x_star, GradientSettings())
        factor = bench_case1.correlation.factor().values
        d_g_u = factor.T @ (d_g * bench_case1.sds)
        direction = -d_g_u / np.linalg.norm(d_g_u)
        angle = np.arccos(np.clip(direction @ res.alpha, -1.0, 1.0))
        assert angle <= 1e-4


class TestLinearOracle:
    def test_two_variable_linear_case(self):
        problem = ReliabilityProblem.from_text(
            "x1 - x2", [Marginal.normal(5.0, 1.0), Marginal.normal(3.0, 1.0)]
        )
        res = solve_form(problem)
        assert res.beta == pytest.approx(2.0 / np.sqrt(2.0), abs=1e-6)
        assert res.pf == pytest.approx(0.07865, abs=1e-4)
        assert res.iterations <= 2

    def test_random_linear_cases_match_closed_form(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            n = int(rng.integers(2, 5))
            a = rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
            means = rng.uniform(-2.0, 6.0, n)
            sds = rng.uniform(0.3, 2.0, n)
            corr = random_correlation_matrix(rng, n)
            b = float(
                2.0 * np.linalg.norm(a * sds) + 1.0 - a @ means
            )  # keeps the mean-point g positive
            text = " + ".join(f"{a[i]} * x{i + 1}" for i in range(n)) + f" + {b}"
            problem = ReliabilityProblem.from_text(
                text, [Marginal.normal(means[i], sds[i]) for i in range(n)], corr.values
            )
            expected = linear_beta_oracle(a, b, means, sds, corr.values)
            res = solve_form(problem)
            assert res.converged
            assert res.beta == pytest.approx(expected, abs=1e-4)


class TestBehaviour:
    def test_scale_invariance(self, bench_case1):
        scaled = ReliabilityProblem.from_text(
            "7 * (x1^2 + x2^3 - 50)",
            list(bench_case1.marginals),
            bench_case1.correlation.values,
        )
        base = solve_form(bench_case1)
        res = solve_form(scaled)
        assert res.beta == pytest.approx(base.beta, abs=1e-9)
        assert res.iterations == base.iterations
        assert res.x_star == pytest.approx(base.x_star, abs=1e-8)

    def test_mean_shift_changes_result(self):
        # guards against the failure mode where the update ignores the
        # G residual: a shifted mean must move the reliability index
        def solve_with_mean(mu1):
            problem = ReliabilityProblem.from_text(
                "x1^2 + x2^2 - 25",
                [Marginal.normal(mu1, 1.0), Marginal.normal(3.0, 1.0)],
            )
            return solve_form(problem)

        beta_a = solve_with_mean(5.0).beta
        beta_b = solve_with_mean(7.0).beta
        assert abs(beta_a - beta_b) > 0.5

    def test_zero_gradient_error(self):
        problem = ReliabilityProblem.from_text(
            "0 * x1 + 5", [Marginal.normal(0.0, 1.0)]
        )
        with pytest.raises(ZeroGradientError):
            solve_form(problem)

    def test_max_iter_exhaustion_flagged(self, bench_case1):
        res = solve_form(bench_case1, max_iter=2)
        assert not res.converged
        assert res.iterations == 2
        assert np.isfinite(res.beta)

    def test_custom_start(self, bench_case1):
        res = solve_form(bench_case1, start=[5.0, 5.0])
        assert res.converged
        assert res.beta == pytest.approx(2.7404, abs=1e-3)

    def test_lognormal_marginals_converge(self):
        problem = ReliabilityProblem.from_text(
            "x1 * x2 - 10",
            [Marginal.lognormal(6.0, 1.2), Marginal.lognormal(4.0, 0.8)],
        )
        res = solve_form(problem)
        assert res.converged
        assert np.linalg.norm(res.u_star) == pytest.approx(res.beta, abs=1e-6)
        assert abs(problem.g(res.x_star)) <= 1e-3

    def test_options_validation(self, bench_case1):
        with pytest.raises(ValueError):
            solve_form(bench_case1, max_iter=0)
        with pytest.raises(ValueError):
            solve_form(bench_case1, tol=-1.0)
        with pytest.raises(ValueError):
            solve_form(bench_case1, start=[1.0])


class TestBetaFromPf:
    def test_median(self):
        assert beta_from_pf(0.5) == 0.0

    def test_benchmark_values(self):
        assert beta_from_pf(2.87e-3) == pytest.approx(2.76, abs=5e-3)
        assert beta_from_pf(1.73e-4) == pytest.approx(3.58, abs=5e-3)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1, 2.0):
            with pytest.raises(ValueError):
                beta_from_pf(bad)


class TestEstimator:
    def test_matches_function(self, bench_case1):
        est = FormAnalysis()
        res = est.solve(bench_case1)
        assert res.beta == solve_form(bench_case1).beta

    def test_get_params_and_clone(self):
        est = FormAnalysis(max_iter=50, tol=1e-8, gradient_scheme="central")
        params = est.get_params()
        assert params["max_iter"] == 50
        assert params["gradient_scheme"] == "central"
        twin = clone(est)
        assert twin.get_params() == params

    def test_set_params(self, bench_case1):
        est = FormAnalysis().set_params(gradient_h=1e-6)
        assert est.solve(bench_case1).converged

    def test_invalid_scheme_rejected_at_solve(self, bench_case1):
        est = FormAnalysis(gradient_scheme="bogus")
        with pytest.raises(ValueError):
            est.solve(bench_case1)
