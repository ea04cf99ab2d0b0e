"""Symmetric-matrix helpers: validated correlation matrices and Cholesky factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefiniteError

__all__ = ["LowerTriangularFactor", "CorrelationMatrix", "cholesky_lower"]

# asymmetry up to this level is repaired by averaging with the transpose
SYMMETRY_TOL = 1e-9


def _first_bad_pivot(m: np.ndarray) -> int:
    """0-based index of the first leading minor that is not positive definite."""
    for k in range(1, m.shape[0] + 1):
        try:
            np.linalg.cholesky(m[:k, :k])
        except np.linalg.LinAlgError:
            return k - 1
    return m.shape[0] - 1


@dataclass(frozen=True)
class LowerTriangularFactor:
    """Lower-triangular matrix L with L @ L.T equal to the factored source."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"factor must be square, got shape {v.shape}")
        if np.any(np.triu(v, 1) != 0.0):
            raise ValueError("factor has nonzero entries above the diagonal")
        if np.any(np.diag(v) <= 0.0):
            raise ValueError("factor diagonal must be strictly positive")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def cholesky_lower(m: np.ndarray) -> LowerTriangularFactor:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Asymmetry within ``SYMMETRY_TOL`` (relative) is repaired by averaging with
    the transpose; anything larger is rejected. A non-PD input raises
    :class:`NotPositiveDefiniteError` carrying the first failing pivot index.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    scale = max(1.0, float(np.abs(m).max()))
    asym = float(np.abs(m - m.T).max())
    if asym > SYMMETRY_TOL * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    if asym > 0.0:
        m = 0.5 * (m + m.T)
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        pivot = _first_bad_pivot(m)
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (pivot {pivot})", pivot_index=pivot
        ) from None
    return LowerTriangularFactor(lower)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Validated correlation matrix: symmetric, unit diagonal, positive definite."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"correlation matrix must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("correlation entries must be finite")
        if np.abs(v - v.T).max() > 1e-12:
            raise ValueError("correlation matrix must be symmetric")
        if np.any(np.diag(v) != 1.0):
            raise ValueError("correlation matrix must have a unit diagonal")
        off = v[~np.eye(v.shape[0], dtype=bool)]
        if off.size and (off.min() < -1.0 or off.max() > 1.0):
            raise ValueError("off-diagonal correlations must lie in [-1, 1]")
        v = 0.5 * (v + v.T)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        # fails with NotPositiveDefiniteError if the matrix is invalid
        object.__setattr__(self, "_factor", cholesky_lower(v))

    @classmethod
    def identity(cls, dim: int) -> "CorrelationMatrix":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def factor(self) -> LowerTriangularFactor:
        """Lower Cholesky factor (cached at construction)."""
        return self._factor
