"""Mappings between physical space and uncorrelated standard-normal space.

Correlation is applied directly in standardized space: z = Phi^-1(F(x)) is
decorrelated through the lower Cholesky factor of the correlation matrix.
For non-normal marginals this deliberately omits the correlation-distortion
correction of the full Nataf model.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .distributions import Marginal
from .linalg import LowerTriangularFactor

__all__ = ["x_to_u", "u_to_x"]


def _check_dims(v: np.ndarray, marginals, factor: LowerTriangularFactor):
    n = len(marginals)
    if factor.dim != n:
        raise ValueError(f"factor dimension {factor.dim} != {n} marginals")
    if v.ndim == 0 or v.shape[-1] != n:
        raise ValueError(f"expected last dimension {n}, got shape {v.shape}")


def x_to_u(x, marginals: list[Marginal], corr_factor: LowerTriangularFactor):
    """Physical values to independent standard normals.

    Accepts a single point of shape (n,) or a batch (..., n).
    """
    x = np.asarray(x, dtype=float)
    _check_dims(x, marginals, corr_factor)
    z = np.stack(
        [m.to_standard(x[..., i]) for i, m in enumerate(marginals)], axis=-1
    )
    n = len(marginals)
    flat = z.reshape(-1, n)
    u = solve_triangular(corr_factor.values, flat.T, lower=True).T
    return u.reshape(z.shape)


def u_to_x(u, marginals: list[Marginal], corr_factor: LowerTriangularFactor):
    """Inverse of :func:`x_to_u`."""
    u = np.asarray(u, dtype=float)
    _check_dims(u, marginals, corr_factor)
    z = u @ corr_factor.values.T
    x = np.stack(
        [m.from_standard(z[..., i]) for i, m in enumerate(marginals)], axis=-1
    )
    return x
