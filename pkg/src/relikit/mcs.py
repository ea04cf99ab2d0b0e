"""Crude Monte Carlo failure-probability estimation with standard errors.

Sample inputs are generated in fixed-size chunks, each from a substream
derived from (seed, chunk index). Estimates therefore do not depend on how
chunks are grouped into evaluation blocks or scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .distributions import std_normal_inv_cdf
from .errors import EvaluationDomainError
from .problem import ReliabilityProblem
from .rng import RandomStream
from .validation import require_positive_int

__all__ = ["McsResult", "crude_mcs", "CrudeMonteCarlo"]

DRAW_CHUNK = 1 << 17  # samples per substream; fixed so results are batch-invariant
_NS_CHUNK = 1  # substream namespace


@dataclass(frozen=True)
class McsResult:
    """Crude Monte Carlo estimate of P(g <= 0).

    ``beta_hat`` is None when the estimate is 0 or 1 and the reliability
    index is undefined.
    """

    pf_hat: float
    n_samples: int
    n_failures: int
    std_error: float
    ci95: tuple[float, float]
    beta_hat: float | None


def _chunk_failures(problem: ReliabilityProblem, seed: int, chunk: int, count: int) -> int:
    stream = RandomStream(seed).derive(_NS_CHUNK, chunk)
    x = problem.sample(stream, count)
    try:
        g = problem.g(x)
    except EvaluationDomainError as exc:
        # locate the first offending sample for the diagnostic
        for i in range(count):
            try:
                problem.g(x[i])
            except EvaluationDomainError:
                raise EvaluationDomainError(
                    f"limit-state evaluation failed at sample {chunk * DRAW_CHUNK + i}",
                    exc.subexpression,
                ) from exc
        raise
    return int(np.count_nonzero(g <= 0.0))


def crude_mcs(
    problem: ReliabilityProblem,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> McsResult:
    """Estimate the failure probability from ``n_samples`` independent draws."""
    n_samples = require_positive_int("n_samples", n_samples)
    threads = require_positive_int("threads", threads)
    n_chunks = (n_samples + DRAW_CHUNK - 1) // DRAW_CHUNK
    sizes = [
        min(DRAW_CHUNK, n_samples - c * DRAW_CHUNK) for c in range(n_chunks)
    ]
    if threads == 1:
        counts = [
            _chunk_failures(problem, seed, c, size) for c, size in enumerate(sizes)
        ]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(
                pool.map(
                    lambda cs: _chunk_failures(problem, seed, cs[0], cs[1]),
                    enumerate(sizes),
                )
            )
    n_failures = int(sum(counts))
    pf = n_failures / n_samples
    se = float(np.sqrt(pf * (1.0 - pf) / n_samples))
    ci = (max(0.0, pf - 1.96 * se), min(1.0, pf + 1.96 * se))
    beta = -std_normal_inv_cdf(pf) if 0.0 < pf < 1.0 else None
    return McsResult(
        pf_hat=pf,
        n_samples=n_samples,
        n_failures=n_failures,
        std_error=se,
        ci95=ci,
        beta_hat=beta,
    )


class CrudeMonteCarlo(BaseEstimator):
    """Estimator-style front end for :func:`crude_mcs`.

    Parameters
    ----------
    n_samples : int
        Total simulation budget.
    seed : int
        Master seed; chunk substreams derive from it.
    threads : int
        Worker threads for chunk evaluation; results are identical for any
        thread count.
    """

    def __init__(self, n_samples=10_000_000, seed=0, threads=1):
        self.n_samples = n_samples
        self.seed = seed
        self.threads = threads

    def run(self, problem: ReliabilityProblem) -> McsResult:
        return crude_mcs(problem, self.n_samples, self.seed, threads=self.threads)
