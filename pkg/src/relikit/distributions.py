"""Univariate marginals and normal-distribution primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .linalg import cholesky_lower

__all__ = ["std_normal_cdf", "std_normal_inv_cdf", "mvn_logpdf", "Marginal"]

_LOG_2PI = math.log(2.0 * math.pi)


def std_normal_cdf(x):
    """Standard normal CDF. Scalar or elementwise on arrays."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("std_normal_cdf requires finite input")
    out = ndtr(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def std_normal_inv_cdf(p):
    """Standard normal quantile function on (0, 1). Scalar or elementwise."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or not np.all(np.isfinite(arr)):
        raise ValueError("std_normal_inv_cdf requires probabilities strictly inside (0, 1)")
    out = ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def mvn_logpdf(x, mean, cov) -> float:
    """Log-density of a multivariate normal at ``x``.

    ``cov`` must be symmetric positive definite; dimension mismatches and
    non-PD covariances raise.
    """
    x = np.asarray(x, dtype=float).ravel()
    mean = np.asarray(mean, dtype=float).ravel()
    cov = np.asarray(cov, dtype=float)
    n = x.size
    if mean.size != n or cov.shape != (n, n):
        raise ValueError(
            f"dimension mismatch: x has {n}, mean has {mean.size}, cov is {cov.shape}"
        )
    factor = cholesky_lower(cov)
    half = np.linalg.solve(factor.values, x - mean)
    log_det = 2.0 * np.sum(np.log(np.diag(factor.values)))
    return float(-0.5 * (n * _LOG_2PI + log_det + half @ half))


@dataclass(frozen=True)
class Marginal:
    """Univariate marginal distribution parameterized by physical mean/sd.

    ``kind`` is ``"normal"`` or ``"lognormal"``. For the lognormal, ``mean``
    and ``sd`` are the moments of the physical variable itself; the
    underlying Gaussian parameters are derived internally.
    """

    kind: str
    mean: float
    sd: float

    def __post_init__(self):
        if self.kind not in ("normal", "lognormal"):
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "sd", float(self.sd))
        if not (self.sd > 0.0 and math.isfinite(self.sd)):
            raise ValueError(f"sd must be positive and finite, got {self.sd}")
        if not math.isfinite(self.mean):
            raise ValueError("mean must be finite")
        if self.kind == "lognormal" and self.mean <= 0.0:
            raise ValueError("lognormal marginal requires mean > 0")

    @classmethod
    def normal(cls, mean: float, sd: float) -> "Marginal":
        return cls("normal", mean, sd)

    @classmethod
    def lognormal(cls, mean: float, sd: float) -> "Marginal":
        return cls("lognormal", mean, sd)

    def _log_params(self) -> tuple[float, float]:
        # moments of the underlying Gaussian of ln(X)
        var_ln = math.log1p((self.sd / self.mean) ** 2)
        mu_ln = math.log(self.mean) - 0.5 * var_ln
        return mu_ln, math.sqrt(var_ln)

    def to_standard(self, x):
        """Map physical values to standard-normal scores, z = Phi^-1(F(x))."""
        x = np.asarray(x, dtype=float)
        if self.kind == "normal":
            z = (x - self.mean) / self.sd
        else:
            if np.any(x <= 0.0):
                raise ValueError("lognormal marginal is undefined for x <= 0")
            mu_ln, sd_ln = self._log_params()
            z = (np.log(x) - mu_ln) / sd_ln
        return float(z) if z.ndim == 0 else z

    def from_standard(self, z):
        """Inverse of :meth:`to_standard`."""
        z = np.asarray(z, dtype=float)
        if self.kind == "normal":
            x = self.mean + self.sd * z
        else:
            mu_ln, sd_ln = self._log_params()
            x = np.exp(mu_ln + sd_ln * z)
        return float(x) if x.ndim == 0 else x

    def cdf(self, x):
        return std_normal_cdf(self.to_standard(x))

    def inv_cdf(self, p):
        return self.from_standard(std_normal_inv_cdf(p))
