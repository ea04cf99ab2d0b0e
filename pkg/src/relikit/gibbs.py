"""Bayesian updating of a multivariate-normal model by Gibbs sampling.

The sampler alternates exact conjugate conditionals: the mean draw combines a
Gaussian prior with the current covariance estimate, the covariance draw is
inverse-Wishart with the residual scatter added to the prior scale, and
missing cells are redrawn row by row from their Gaussian conditionals given
the observed entries. Observed data is never modified.

Per-iteration imputation noise comes from one (m, n) standard-normal panel;
row i consumes only its own row of the panel, so rows may be imputed in any
order (or in parallel) without changing the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import betaincinv, gammaincinv
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import NumericalDegeneracyError
from .linalg import CorrelationMatrix, cholesky_lower
from .rng import RandomStream
from .validation import (
    require_non_negative_int,
    require_open_probability,
    require_positive,
    require_positive_int,
)

__all__ = [
    "DataMatrix",
    "PriorSpec",
    "GibbsConfig",
    "PosteriorSamples",
    "CellInterval",
    "run_gibbs",
    "sample_inverse_wishart",
    "posterior_predictive",
    "missing_value_intervals",
    "random_correlation",
    "BayesianMvnImputer",
]

_NS_PREDICTIVE = 3
_EIGEN_FLOOR = 1e-8
_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class DataMatrix:
    """Observation matrix (m rows, n columns) with NaN marking missing cells.

    Every column needs at least 2 observed entries and every row at least 1.
    """

    values: np.ndarray
    missing_mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.missing_mask, dtype=bool)
        if values.ndim != 2:
            raise ValueError(f"data must be 2-D, got shape {values.shape}")
        if mask.shape != values.shape:
            raise ValueError("missing_mask shape must match data shape")
        if not np.array_equal(np.isnan(values), mask):
            raise ValueError("missing_mask must mark exactly the NaN cells")
        observed_per_col = (~mask).sum(axis=0)
        if np.any(observed_per_col < 2):
            bad = int(np.argmin(observed_per_col))
            raise ValueError(f"column {bad} has fewer than 2 observed entries")
        observed_per_row = (~mask).sum(axis=1)
        if np.any(observed_per_row < 1):
            bad = int(np.argmin(observed_per_row))
            raise ValueError(f"row {bad} has no observed entries")
        if not np.all(np.isfinite(values[~mask])):
            raise ValueError("observed entries must be finite")
        values = values.copy()
        values.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing_mask", mask)

    @classmethod
    def from_array(cls, values) -> "DataMatrix":
        values = np.asarray(values, dtype=float)
        return cls(values, np.isnan(values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class PriorSpec:
    """Semi-conjugate prior; None fields resolve to diffuse defaults.

    Defaults given n columns: zero prior mean with covariance 100 I for the
    mean vector, and inverse-Wishart(I, n + 2) for the covariance.
    """

    mu0: np.ndarray | None = None
    sigma0: np.ndarray | None = None
    nu0: float | None = None
    psi0: np.ndarray | None = None

    def resolve(self, n: int):
        mu0 = np.zeros(n) if self.mu0 is None else np.asarray(self.mu0, dtype=float)
        sigma0 = (
            100.0 * np.eye(n) if self.sigma0 is None
            else np.asarray(self.sigma0, dtype=float)
        )
        nu0 = float(n + 2) if self.nu0 is None else float(self.nu0)
        psi0 = np.eye(n) if self.psi0 is None else np.asarray(self.psi0, dtype=float)
        if mu0.shape != (n,):
            raise ValueError(f"mu0 must have shape ({n},), got {mu0.shape}")
        if sigma0.shape != (n, n):
            raise ValueError(f"sigma0 must have shape ({n},{n}), got {sigma0.shape}")
        if psi0.shape != (n, n):
            raise ValueError(f"psi0 must have shape ({n},{n}), got {psi0.shape}")
        if not nu0 > n - 1:
            raise ValueError(f"nu0 must exceed n - 1 = {n - 1}, got {nu0}")
        cholesky_lower(sigma0)
        cholesky_lower(psi0)
        return mu0, sigma0, nu0, psi0


@dataclass(frozen=True)
class GibbsConfig:
    """Chain length, burn-in, and master seed."""

    num_iterations: int = 2000
    burn_in: int = 500
    seed: int = 0

    def __post_init__(self):
        require_positive_int("num_iterations", self.num_iterations)
        require_non_negative_int("burn_in", self.burn_in)
        if self.burn_in >= self.num_iterations:
            raise ValueError(
                f"burn_in ({self.burn_in}) must be smaller than "
                f"num_iterations ({self.num_iterations})"
            )


@dataclass(frozen=True)
class PosteriorSamples:
    """Retained Gibbs draws plus the data they condition on."""

    mu_samples: np.ndarray            # (T, n)
    sigma_samples: np.ndarray         # (T, n, n)
    imputed_data_samples: np.ndarray  # (T, m, n)
    data: DataMatrix

    @property
    def n_retained(self) -> int:
        return self.mu_samples.shape[0]


@dataclass(frozen=True)
class CellInterval:
    """Posterior summary of one imputed cell."""

    row: int
    col: int
    lower: float
    median: float
    upper: float


def sample_inverse_wishart(psi: np.ndarray, nu: float, stream: RandomStream) -> np.ndarray:
    """One inverse-Wishart draw via the Bartlett factorization.

    Parameterized so the mean is ``psi / (nu - n - 1)`` for ``nu > n + 1``.
    """
    psi = np.asarray(psi, dtype=float)
    n = psi.shape[0]
    if not nu > n - 1:
        raise ValueError(f"degrees of freedom must exceed n - 1 = {n - 1}, got {nu}")
    l_psi = cholesky_lower(psi).values
    dof = nu - np.arange(n)
    diag = np.sqrt(2.0 * gammaincinv(dof / 2.0, np.atleast_1d(stream.uniform(n))))
    bart = np.zeros((n, n))
    bart[np.diag_indices(n)] = diag
    if n > 1:
        bart[np.tril_indices(n, -1)] = stream.standard_normal(n * (n - 1) // 2)
    # Sigma = (L_psi A^-T)(L_psi A^-T)^T  with  A A^T ~ Wishart(I, nu)
    t = solve_triangular(bart, l_psi.T, lower=True)
    out = t.T @ t
    return 0.5 * (out + out.T)


def _pairwise_covariance(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Covariance with pairwise deletion (may be indefinite)."""
    m, n = values.shape
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            both = ~mask[:, i] & ~mask[:, j]
            count = int(both.sum())
            if count > 1:
                xi = values[both, i]
                xj = values[both, j]
                cov = float(((xi - xi.mean()) * (xj - xj.mean())).sum() / (count - 1))
            else:
                cov = 0.0
            out[i, j] = out[j, i] = cov
    return out


def _clip_to_pd(matrix: np.ndarray, floor: float = _EIGEN_FLOOR) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (matrix + matrix.T))
    if w.min() > floor:
        return matrix
    w = np.clip(w, floor, None)
    return (v * w) @ v.T


def _missing_patterns(mask: np.ndarray):
    """Group row indices by identical missing pattern (rows with any gap)."""
    rows = np.nonzero(mask.any(axis=1))[0]
    groups: dict[bytes, list[int]] = {}
    for i in rows:
        groups.setdefault(mask[i].tobytes(), []).append(int(i))
    return [(np.frombuffer(key, dtype=bool), np.array(idx)) for key, idx in groups.items()]


def run_gibbs(
    data: DataMatrix | np.ndarray,
    config: GibbsConfig | None = None,
    prior: PriorSpec | None = None,
) -> PosteriorSamples:
    """Sample the posterior of (mean, covariance) and impute missing cells.

    Initialization: columnwise observed means, pairwise-deletion covariance
    (eigenvalue-clipped to PD when indefinite), and independent standard
    normal draws in the missing cells. Deterministic for a fixed seed.
    """
    if not isinstance(data, DataMatrix):
        data = DataMatrix.from_array(data)
    config = config or GibbsConfig()
    prior = prior or PriorSpec()
    m, n = data.shape
    mu0, sigma0, nu0, psi0 = prior.resolve(n)
    mask = data.missing_mask
    stream = RandomStream(config.seed)

    sigma_est = _clip_to_pd(_pairwise_covariance(data.values, mask))
    imputed = data.values.copy()
    n_missing = int(mask.sum())
    if n_missing:
        imputed[mask] = np.atleast_1d(stream.standard_normal(n_missing))

    sigma0_inv = np.linalg.inv(sigma0)
    patterns = _missing_patterns(mask)
    n_retained = config.num_iterations - config.burn_in
    mu_out = np.empty((n_retained, n))
    sigma_out = np.empty((n_retained, n, n))
    imputed_out = np.empty((n_retained, m, n))

    for it in range(config.num_iterations):
        sigma_inv = np.linalg.inv(sigma_est)
        sigma_n = np.linalg.inv(sigma0_inv + m * sigma_inv)
        sigma_n = 0.5 * (sigma_n + sigma_n.T)
        mu_n = sigma_n @ (sigma0_inv @ mu0 + m * sigma_inv @ imputed.mean(axis=0))
        mu_est = mu_n + cholesky_lower(sigma_n).values @ np.atleast_1d(
            stream.standard_normal(n)
        )

        resid = imputed - mu_est
        psi_n = psi0 + resid.T @ resid
        sigma_est = sample_inverse_wishart(0.5 * (psi_n + psi_n.T), nu0 + m, stream)

        if patterns:
            noise = stream.standard_normal((m, n))
            for pattern, rows in patterns:
                obs = ~pattern
                mis = pattern
                k = int(mis.sum())
                s_oo = sigma_est[np.ix_(obs, obs)]
                if np.linalg.cond(s_oo) > _CONDITION_LIMIT:
                    raise NumericalDegeneracyError(
                        f"observed-block covariance is numerically singular "
                        f"for row {rows[0]}",
                        row=int(rows[0]),
                    )
                s_om = sigma_est[np.ix_(obs, mis)]
                s_mm = sigma_est[np.ix_(mis, mis)]
                solved = np.linalg.solve(
                    s_oo,
                    np.concatenate(
                        [(imputed[rows][:, obs] - mu_est[obs]).T, s_om], axis=1
                    ),
                )
                cond_mean = mu_est[mis] + (s_om.T @ solved[:, : len(rows)]).T
                cond_cov = s_mm - s_om.T @ solved[:, len(rows):]
                w, v = np.linalg.eigh(0.5 * (cond_cov + cond_cov.T))
                factor = v * np.sqrt(np.clip(w, 0.0, None))
                draws = cond_mean + noise[rows][:, :k] @ factor.T
                imputed[np.ix_(rows, np.nonzero(mis)[0])] = draws

        if it >= config.burn_in:
            t = it - config.burn_in
            mu_out[t] = mu_est
            sigma_out[t] = sigma_est
            imputed_out[t] = imputed

    return PosteriorSamples(mu_out, sigma_out, imputed_out, data)


def posterior_predictive(
    samples: PosteriorSamples, count_per_draw: int, stream: RandomStream
) -> np.ndarray:
    """Draw new observations under each retained (mean, covariance) pair.

    Returns a ``(n_retained * count_per_draw, n)`` matrix grouped by draw.
    """
    count_per_draw = require_non_negative_int("count_per_draw", count_per_draw)
    t, n = samples.mu_samples.shape
    if t == 0:
        raise ValueError("posterior contains no retained draws")
    if count_per_draw == 0:
        return np.empty((0, n))
    out = np.empty((t, count_per_draw, n))
    for i in range(t):
        factor = cholesky_lower(_clip_to_pd(samples.sigma_samples[i])).values
        z = stream.standard_normal((count_per_draw, n))
        out[i] = samples.mu_samples[i] + z @ factor.T
    return out.reshape(t * count_per_draw, n)


def missing_value_intervals(
    samples: PosteriorSamples, level: float = 0.95
) -> list[CellInterval]:
    """Equal-tail posterior intervals and medians for every missing cell."""
    level = require_open_probability("level", level)
    mask = samples.data.missing_mask
    lo_q = (1.0 - level) / 2.0
    out = []
    for row, col in np.argwhere(mask):
        draws = samples.imputed_data_samples[:, row, col]
        lo, med, hi = np.quantile(draws, [lo_q, 0.5, 1.0 - lo_q])
        out.append(CellInterval(int(row), int(col), float(lo), float(med), float(hi)))
    return out


def random_correlation(dim: int, stream: RandomStream, eta: float = 2.0) -> CorrelationMatrix:
    """Random correlation matrix from a vine of Beta partial correlations.

    Layer-k partial correlations are Beta(b, b) rescaled to (-1, 1) with
    b = eta + (dim - 2 - k) / 2, giving positive-definite matrices whose
    off-diagonals are symmetric about zero.
    """
    dim = require_positive_int("dim", dim)
    if dim < 2:
        raise ValueError(f"dim must be at least 2, got {dim}")
    eta = require_positive("eta", eta)
    partial = np.zeros((dim, dim))
    corr = np.eye(dim)
    for k in range(dim - 1):
        b = eta + (dim - 2 - k) / 2.0
        for i in range(k + 1, dim):
            p = 2.0 * float(betaincinv(b, b, stream.uniform())) - 1.0
            partial[k, i] = p
            for layer in range(k - 1, -1, -1):
                p = (
                    p * np.sqrt((1 - partial[layer, i] ** 2) * (1 - partial[layer, k] ** 2))
                    + partial[layer, i] * partial[layer, k]
                )
            corr[k, i] = corr[i, k] = p
    return CorrelationMatrix(corr)


class BayesianMvnImputer(BaseEstimator):
    """Gibbs-sampled multivariate-normal model with missing-data imputation.

    ``fit`` runs the chain on an (m, n) array whose NaN cells are treated as
    missing; ``transform`` fills missing cells with their posterior-mean
    conditional imputation; ``sample_predictive`` draws new observations from
    the posterior predictive distribution.

    Parameters
    ----------
    num_iterations : int
        Total Gibbs sweeps.
    burn_in : int
        Leading sweeps to discard.
    seed : int
        Master seed for the chain (predictive draws use a derived substream).
    prior : PriorSpec or None
        Semi-conjugate prior; None uses the diffuse defaults.
    """

    def __init__(self, num_iterations=2000, burn_in=500, seed=0, prior=None):
        self.num_iterations = num_iterations
        self.burn_in = burn_in
        self.seed = seed
        self.prior = prior

    def fit(self, X, y=None) -> "BayesianMvnImputer":
        config = GibbsConfig(self.num_iterations, self.burn_in, self.seed)
        self.posterior_ = run_gibbs(X, config=config, prior=self.prior)
        self.n_features_in_ = self.posterior_.data.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "posterior_"):
            raise NotFittedError("this BayesianMvnImputer instance is not fitted yet")

    def transform(self, X) -> np.ndarray:
        """Impute NaN cells of X by posterior-mean Gaussian conditionals."""
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X must have shape (m, {self.n_features_in_}), got {X.shape}"
            )
        out = X.copy()
        mask = np.isnan(out)
        mu_draws = self.posterior_.mu_samples
        sigma_draws = self.posterior_.sigma_samples
        for pattern, rows in _missing_patterns(mask):
            obs = ~pattern
            mis = pattern
            if not obs.any():
                out[np.ix_(rows, np.nonzero(mis)[0])] = mu_draws.mean(axis=0)[mis]
                continue
            s_oo = sigma_draws[:, obs][:, :, obs]
            s_om = sigma_draws[:, obs][:, :, mis]
            solved = np.linalg.solve(s_oo, s_om)  # (T, n_obs, n_mis)
            resid = out[rows][:, obs][None, :, :] - mu_draws[:, obs][:, None, :]
            cond = mu_draws[:, mis][:, None, :] + np.einsum(
                "tro,tom->trm", resid, solved
            )
            out[np.ix_(rows, np.nonzero(mis)[0])] = cond.mean(axis=0)
        return out

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)

    def sample_predictive(self, count_per_draw: int, seed: int | None = None) -> np.ndarray:
        self._check_fitted()
        base = self.seed if seed is None else seed
        stream = RandomStream(base).derive(_NS_PREDICTIVE)
        return posterior_predictive(self.posterior_, count_per_draw, stream)

    def missing_intervals(self, level: float = 0.95) -> list[CellInterval]:
        self._check_fitted()
        return missing_value_intervals(self.posterior_, level)
