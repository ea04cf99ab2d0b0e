"""Subset simulation for small failure probabilities.

The failure probability is decomposed over nested intermediate events
``g <= y_1 > y_2 > ... > y_m = 0``; each conditional probability is pinned
near ``p0`` by taking the ``ceil(p0*N)``-th smallest limit-state value as the
next threshold and repopulating by MCMC restricted to the current event.

Two conditional-sampling kernels are provided:

* ``"joint-walk"`` threads a single random-walk chain through the
  population (each new sample is seeded by the previous slot); proposals are
  correlated Gaussian steps and acceptance uses the joint input-density
  ratio. Valid for normal marginals only.
* ``"componentwise-mmh"`` grows one chain per retained seed in independent
  standard-normal space, with per-component proposals accepted by 1-D density
  ratios and a composite indicator check. Valid for any marginals.

Studies over many seeds run the replicas in lock-step so the per-seed results
are bitwise identical to individual runs while sharing vectorized work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .distributions import mvn_logpdf
from .errors import DegenerateProblemError
from .problem import ReliabilityProblem
from .rng import RandomStream
from .validation import (
    require_choice,
    require_open_probability,
    require_positive,
    require_positive_int,
)

__all__ = [
    "SubsetResult",
    "run_subset",
    "run_subset_study",
    "joint_walk_step",
    "mmh_componentwise_step",
    "SubsetSimulation",
]

KERNELS = ("joint-walk", "componentwise-mmh")


@dataclass(frozen=True)
class SubsetResult:
    """Outcome of one subset-simulation run.

    ``thresholds`` holds one entry per level; the last is <= 0 unless the run
    was truncated by the level budget, in which case ``pf`` is the upper
    bound ``p0 ** max_levels`` and ``truncated`` is set.
    ``conditional_probs`` are Ns/N for every non-final level and the final
    failure fraction for the last; ``pf`` is their product in the
    ``p0 ** (m - 1) * last`` form. ``acceptance_rate_per_level`` has one entry
    per repopulation (levels_used - 1 for completed runs).
    """

    pf: float
    levels_used: int
    thresholds: np.ndarray
    conditional_probs: np.ndarray
    acceptance_rate_per_level: np.ndarray
    truncated: bool
    seed: int
    final_level_samples: np.ndarray | None = None
    level_samples: tuple[np.ndarray, ...] | None = None
    level_g: tuple[np.ndarray, ...] | None = None


def _input_covariance(problem: ReliabilityProblem) -> np.ndarray:
    sds = problem.sds
    return problem.correlation.values * np.outer(sds, sds)


# --------------------------------------------------------------------------
# single-step kernels (the unit operations behind the level repopulation)
# --------------------------------------------------------------------------


def joint_walk_step(
    current: np.ndarray,
    proposal_std: float,
    threshold: float,
    problem: ReliabilityProblem,
    stream: RandomStream,
) -> np.ndarray:
    """One correlated random-walk move restricted to ``g <= threshold``.

    Operates in physical space: the proposal adds a correlated Gaussian step
    scaled by ``proposal_std``; acceptance is the joint normal input-density
    ratio, zeroed when the candidate leaves the conditional failure region.
    Consumes n normal draws and one uniform regardless of the outcome.
    """
    current = np.asarray(current, dtype=float)
    factor = problem.correlation.factor().values
    z = np.atleast_1d(stream.standard_normal(problem.n))
    accept_u = stream.uniform()
    proposal = current + (z @ factor.T) * proposal_std
    g_prop = problem.g(proposal)
    if g_prop <= threshold:
        cov = _input_covariance(problem)
        mean = problem.means
        log_ratio = mvn_logpdf(proposal, mean, cov) - mvn_logpdf(current, mean, cov)
        alpha = min(1.0, float(np.exp(min(0.0, log_ratio))))
    else:
        alpha = 0.0
    return proposal if accept_u < alpha else current


def mmh_componentwise_step(
    current: np.ndarray,
    sigma_j: np.ndarray,
    threshold: float,
    level_limit_state,
    stream: RandomStream,
) -> np.ndarray:
    """One modified Metropolis-Hastings move in independent standard space.

    Each component proposes ``xi_j + sigma_j * Z_j`` and is accepted with the
    1-D standard-normal density ratio; the mixed candidate then passes only
    if ``level_limit_state(candidate) <= threshold``. Consumes n normals and
    n uniforms regardless of the outcome.
    """
    current = np.asarray(current, dtype=float)
    n = current.size
    sigma_j = np.broadcast_to(np.asarray(sigma_j, dtype=float), (n,))
    z = np.atleast_1d(stream.standard_normal(n))
    u = np.atleast_1d(stream.uniform(n))
    proposal = current + sigma_j * z
    log_ratio = 0.5 * (current**2 - proposal**2)
    keep = u < np.exp(np.minimum(0.0, log_ratio))
    candidate = np.where(keep, proposal, current)
    if level_limit_state(candidate) <= threshold:
        return candidate
    return current


# --------------------------------------------------------------------------
# batched level repopulation
# --------------------------------------------------------------------------


def _fill_joint_walk(problem, pop, f_sorted, thr, streams, proposal_std, n_keep):
    """Rebuild each replica's population by threading one chain through it."""
    batch, n_total, n = pop.shape
    factor = problem.correlation.factor().values
    cov_inv = np.linalg.inv(_input_covariance(problem))
    mean = problem.means
    n_new = n_total - n_keep
    z = np.empty((batch, n_new, n))
    accept_u = np.empty((batch, n_new))
    for r, stream in enumerate(streams):
        z[r] = stream.standard_normal((n_new, n))
        accept_u[r] = stream.uniform(n_new)
    steps = (z @ factor.T) * proposal_std

    new_pop = np.empty_like(pop)
    new_f = np.empty((batch, n_total))
    new_pop[:, :n_keep] = pop[:, :n_keep]
    new_f[:, :n_keep] = f_sorted[:, :n_keep]

    cur = new_pop[:, n_keep - 1].copy()
    f_cur = new_f[:, n_keep - 1].copy()
    dev = cur - mean
    lp_cur = -0.5 * np.einsum("ij,jk,ik->i", dev, cov_inv, dev)
    accepted = np.zeros(batch)
    for i in range(n_new):
        prop = cur + steps[:, i]
        f_prop = problem.g(prop)
        dev = prop - mean
        lp_prop = -0.5 * np.einsum("ij,jk,ik->i", dev, cov_inv, dev)
        inside = f_prop <= thr
        alpha = np.where(inside, np.exp(np.minimum(0.0, lp_prop - lp_cur)), 0.0)
        acc = accept_u[:, i] < alpha
        cur = np.where(acc[:, None], prop, cur)
        f_cur = np.where(acc, f_prop, f_cur)
        lp_cur = np.where(acc, lp_prop, lp_cur)
        new_pop[:, n_keep + i] = cur
        new_f[:, n_keep + i] = f_cur
        accepted += acc
    return new_pop, new_f, accepted / n_new


def _fill_mmh(problem, pop, f_sorted, thr, streams, proposal_std, n_keep):
    """Rebuild populations by growing one chain per retained seed."""
    batch, n_total, n = pop.shape
    base, rem = divmod(n_total, n_keep)
    lengths = np.full(n_keep, base)
    lengths[:rem] += 1
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    max_len = int(lengths.max())

    rounds = max_len - 1
    z = np.empty((batch, rounds, n_keep, n))
    u = np.empty((batch, rounds, n_keep, n))
    for r, stream in enumerate(streams):
        z[r] = stream.standard_normal((rounds, n_keep, n))
        u[r] = stream.uniform((rounds, n_keep, n))

    new_pop = np.empty_like(pop)
    new_f = np.empty((batch, n_total))
    new_pop[:, starts] = pop[:, :n_keep]
    new_f[:, starts] = f_sorted[:, :n_keep]

    cur = pop[:, :n_keep].copy()
    f_cur = f_sorted[:, :n_keep].copy()
    moved = np.zeros(batch)
    move_opportunities = float((lengths - 1).sum())
    for t in range(rounds):
        prop = cur + proposal_std * z[:, t]
        log_ratio = 0.5 * (cur**2 - prop**2)
        keep = u[:, t] < np.exp(np.minimum(0.0, log_ratio))
        cand = np.where(keep, prop, cur)
        x_cand = problem.to_x(cand.reshape(batch * n_keep, n))
        f_cand = problem.g(x_cand).reshape(batch, n_keep)
        inside = f_cand <= thr[:, None]
        live = lengths > t + 1  # chains still growing this round
        take = inside & live[None, :]
        changed = take & np.any(keep, axis=2)
        cur = np.where(take[..., None], cand, cur)
        f_cur = np.where(take, f_cand, f_cur)
        slots = starts + t + 1
        write = live
        new_pop[:, slots[write]] = cur[:, write]
        new_f[:, slots[write]] = f_cur[:, write]
        moved += changed.sum(axis=1)
    rate = moved / move_opportunities if move_opportunities else np.zeros(batch)
    return new_pop, new_f, rate


def _run_batch(
    problem: ReliabilityProblem,
    seeds: list[int],
    n_samples: int,
    p0: float,
    max_levels: int,
    proposal_std: float,
    kernel: str,
    keep_final_samples: bool,
    keep_level_samples: bool,
) -> list[SubsetResult]:
    n = problem.n
    n_keep = int(np.ceil(p0 * n_samples))
    in_u_space = kernel == "componentwise-mmh"
    if not in_u_space and any(m.kind != "normal" for m in problem.marginals):
        raise ValueError(
            "the joint-walk kernel assumes normal marginals; "
            "use kernel='componentwise-mmh'"
        )

    batch = len(seeds)
    streams = [RandomStream(s) for s in seeds]
    pop = np.empty((batch, n_samples, n))
    for r, stream in enumerate(streams):
        u0 = stream.standard_normal((n_samples, n))
        pop[r] = u0 if in_u_space else problem.to_x(u0)

    def g_of(pts2d):
        return problem.g(problem.to_x(pts2d) if in_u_space else pts2d)

    f = g_of(pop.reshape(batch * n_samples, n)).reshape(batch, n_samples)

    results: dict[int, SubsetResult] = {}
    thresholds = [[] for _ in range(batch)]
    rates = [[] for _ in range(batch)]
    lvl_samples = [[] for _ in range(batch)] if keep_level_samples else None
    lvl_g = [[] for _ in range(batch)] if keep_level_samples else None
    active = np.arange(batch)

    def finalize(r, level, final_frac, truncated, final_pop, final_f):
        cond = [n_keep / n_samples] * (level - (0 if truncated else 1))
        if not truncated:
            cond.append(final_frac)
        pf = p0**max_levels if truncated else p0 ** (level - 1) * final_frac
        x_final = problem.to_x(final_pop) if in_u_space else final_pop
        results[r] = SubsetResult(
            pf=float(pf),
            levels_used=level,
            thresholds=np.array(thresholds[r]),
            conditional_probs=np.array(cond),
            acceptance_rate_per_level=np.array(rates[r]),
            truncated=truncated,
            seed=seeds[r],
            final_level_samples=np.array(x_final) if keep_final_samples else None,
            level_samples=tuple(lvl_samples[r]) if keep_level_samples else None,
            level_g=tuple(lvl_g[r]) if keep_level_samples else None,
        )

    for level in range(1, max_levels + 1):
        if keep_level_samples:
            for k, r in enumerate(active):
                x_lvl = problem.to_x(pop[k]) if in_u_space else pop[k]
                lvl_samples[r].append(np.array(x_lvl))
                lvl_g[r].append(f[k].copy())
        order = np.argsort(f, axis=1, kind="stable")
        f_sorted = np.take_along_axis(f, order, axis=1)
        thr = f_sorted[:, n_keep - 1]
        for k, r in enumerate(active):
            thresholds[r].append(float(thr[k]))
        done = thr <= 0.0
        for k in np.nonzero(done)[0]:
            frac = float(np.mean(f[k] <= 0.0))
            finalize(active[k], level, frac, False, pop[k], f[k])
        alive = ~done
        if not alive.any():
            break
        if np.any(f_sorted[alive, 0] == f_sorted[alive, -1]):
            raise DegenerateProblemError(
                "limit state is constant over the population; "
                "intermediate levels cannot be constructed"
            )
        if level == max_levels:
            # budget exhausted: flag survivors with the p0^max_levels bound
            for k in np.nonzero(alive)[0]:
                finalize(active[k], level, np.nan, True, pop[k], f[k])
            break
        active = active[alive]
        streams = [s for s, keep in zip(streams, alive) if keep]
        pop = np.take_along_axis(pop[alive], order[alive][..., None], axis=1)
        f_sorted = f_sorted[alive]
        thr = thr[alive]
        fill = _fill_mmh if in_u_space else _fill_joint_walk
        pop, f, rate = fill(problem, pop, f_sorted, thr, streams, proposal_std, n_keep)
        for k, r in enumerate(active):
            rates[r].append(float(rate[k]))

    return [results[r] for r in range(batch)]


def _check_config(n_samples, p0, max_levels, proposal_std, kernel):
    n_samples = require_positive_int("n_samples", n_samples)
    p0 = require_open_probability("p0", p0)
    if n_samples * p0 < 10:
        raise ValueError(
            f"n_samples * p0 must be at least 10, got {n_samples * p0:.3g}"
        )
    max_levels = require_positive_int("max_levels", max_levels)
    proposal_std = require_positive("proposal_std", proposal_std)
    kernel = require_choice("kernel", kernel, KERNELS)
    return n_samples, p0, max_levels, proposal_std, kernel


def run_subset(
    problem: ReliabilityProblem,
    n_samples: int = 20000,
    p0: float = 0.1,
    max_levels: int = 20,
    proposal_std: float = 0.1,
    kernel: str = "joint-walk",
    seed: int = 0,
    keep_final_samples: bool = False,
    keep_level_samples: bool = False,
) -> SubsetResult:
    """Run one seeded subset simulation. Deterministic for a fixed seed."""
    args = _check_config(n_samples, p0, max_levels, proposal_std, kernel)
    return _run_batch(
        problem, [seed], *args,
        keep_final_samples=keep_final_samples,
        keep_level_samples=keep_level_samples,
    )[0]


def run_subset_study(
    problem: ReliabilityProblem,
    seeds,
    n_samples: int = 20000,
    p0: float = 0.1,
    max_levels: int = 20,
    proposal_std: float = 0.1,
    kernel: str = "joint-walk",
) -> list[SubsetResult]:
    """Run independent repetitions for each seed, merged in seed order.

    Each result is bitwise identical to ``run_subset`` with the same seed;
    replicas advance level by level in lock-step to share vectorized work.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        return []
    args = _check_config(n_samples, p0, max_levels, proposal_std, kernel)
    return _run_batch(
        problem, seeds, *args, keep_final_samples=False, keep_level_samples=False
    )


class SubsetSimulation(BaseEstimator):
    """Estimator-style front end for subset simulation.

    Parameters mirror :func:`run_subset`; ``run`` estimates one seeded
    failure probability and ``study`` repeats over a list of seeds.
    """

    def __init__(self, n_samples=20000, p0=0.1, max_levels=20, proposal_std=0.1,
                 kernel="joint-walk", seed=0,
                 keep_final_samples=False, keep_level_samples=False):
        self.n_samples = n_samples
        self.p0 = p0
        self.max_levels = max_levels
        self.proposal_std = proposal_std
        self.kernel = kernel
        self.seed = seed
        self.keep_final_samples = keep_final_samples
        self.keep_level_samples = keep_level_samples

    def run(self, problem: ReliabilityProblem) -> SubsetResult:
        return run_subset(
            problem,
            n_samples=self.n_samples,
            p0=self.p0,
            max_levels=self.max_levels,
            proposal_std=self.proposal_std,
            kernel=self.kernel,
            seed=self.seed,
            keep_final_samples=self.keep_final_samples,
            keep_level_samples=self.keep_level_samples,
        )

    def study(self, problem: ReliabilityProblem, seeds) -> list[SubsetResult]:
        return run_subset_study(
            problem,
            seeds,
            n_samples=self.n_samples,
            p0=self.p0,
            max_levels=self.max_levels,
            proposal_std=self.proposal_std,
            kernel=self.kernel,
        )
