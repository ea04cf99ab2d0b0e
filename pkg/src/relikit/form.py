"""First Order Reliability Method with the Hasofer-Lind/Rackwitz-Fiessler search.

The iteration alternates between evaluating the limit state and its
finite-difference gradient in physical space, mapping the gradient into
uncorrelated standard-normal space, and updating the iterate along the
importance direction alpha. Convergence uses a dual criterion: the change in
the reliability-index estimate, or the distance between successive iterates.
The iteration count reports completed update steps; the sweep in which
convergence is detected is not counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .distributions import std_normal_cdf, std_normal_inv_cdf
from .errors import ZeroGradientError
from .expressions import GradientSettings, evaluate, gradient
from .problem import ReliabilityProblem
from .validation import require_choice, require_positive, require_positive_int

__all__ = ["FormResult", "solve_form", "beta_from_pf", "FormAnalysis"]

_ZERO_GRADIENT_TOL = 1e-14


@dataclass(frozen=True)
class FormResult:
    """Design-point search outcome.

    ``beta`` is the reliability index, ``pf = Phi(-beta)``; ``x_star`` and
    ``u_star`` are the design point in physical and uncorrelated standard
    space; ``alpha`` is the unit importance direction.
    """

    beta: float
    pf: float
    x_star: np.ndarray
    u_star: np.ndarray
    alpha: np.ndarray
    iterations: int
    converged: bool


def _dx_dz(problem: ReliabilityProblem, x: np.ndarray) -> np.ndarray:
    """Derivative of each marginal's standard-to-physical map at x.

    Equals the marginal sd for normal marginals; for the lognormal it is the
    local slope sd_ln * x, keeping the standardized gradient exact.
    """
    out = np.empty(problem.n)
    for i, m in enumerate(problem.marginals):
        if m.kind == "normal":
            out[i] = m.sd
        else:
            out[i] = m._log_params()[1] * x[i]
    return out


def solve_form(
    problem: ReliabilityProblem,
    max_iter: int = 100,
    tol: float = 1e-6,
    gradient_settings: GradientSettings | None = None,
    start=None,
) -> FormResult:
    """Locate the design point and reliability index by HL-RF iteration.

    Starts from the mean vector unless ``start`` provides a custom point
    (useful to probe problems with multiple design points). Returns
    ``converged=False`` with the best iterate if ``max_iter`` is exhausted.
    """
    max_iter = require_positive_int("max_iter", max_iter)
    tol = require_positive("tol", tol)
    settings = gradient_settings or GradientSettings()
    expr = problem.limit_state
    factor = problem.correlation.factor()

    x = problem.means.copy() if start is None else np.asarray(start, dtype=float).copy()
    if x.shape != (problem.n,):
        raise ValueError(f"start point must have shape ({problem.n},), got {x.shape}")

    beta = np.inf
    alpha = np.zeros(problem.n)
    iterations = 0
    converged = False
    while iterations < max_iter:
        u = problem.to_u(x)
        g_val = evaluate(expr, x)
        d_g = gradient(expr, x, settings)
        d_g_u = factor.values.T @ (d_g * _dx_dz(problem, x))
        norm = float(np.linalg.norm(d_g_u))
        if norm < _ZERO_GRADIENT_TOL:
            raise ZeroGradientError(
                f"standardized gradient vanished at iteration {iterations}"
            )
        alpha = -d_g_u / norm
        beta_new = -g_val / (d_g_u @ alpha) + u @ alpha
        if (
            abs(beta_new - beta) < tol
            or np.linalg.norm(beta_new * alpha - u) < tol
        ):
            converged = True
            break
        beta = beta_new
        u = beta * alpha
        x = problem.to_x(u)
        iterations += 1

    if not converged:
        # report the last accepted iterate
        u = problem.to_u(x)
    return FormResult(
        beta=float(beta),
        pf=std_normal_cdf(-beta),
        x_star=x,
        u_star=u,
        alpha=alpha,
        iterations=iterations,
        converged=converged,
    )


def beta_from_pf(pf: float) -> float:
    """Reliability index implied by a failure probability."""
    if not 0.0 < pf < 1.0:
        raise ValueError(f"pf must lie strictly inside (0, 1), got {pf}")
    return -std_normal_inv_cdf(pf)


class FormAnalysis(BaseEstimator):
    """Estimator-style front end for :func:`solve_form`.

    Parameters
    ----------
    max_iter : int
        Iteration budget for the design-point search.
    tol : float
        Dual convergence tolerance (index change or iterate distance).
    gradient_h : float
        Absolute finite-difference step.
    gradient_scheme : {"forward", "central"}
        Differencing scheme; forward matches the classical recipe.
    start : array-like or None
        Custom start point in physical space; None starts at the means.
    """

    def __init__(self, max_iter=100, tol=1e-6, gradient_h=1e-5,
                 gradient_scheme="forward", start=None):
        self.max_iter = max_iter
        self.tol = tol
        self.gradient_h = gradient_h
        self.gradient_scheme = gradient_scheme
        self.start = start

    def solve(self, problem: ReliabilityProblem) -> FormResult:
        settings = GradientSettings(
            h=require_positive("gradient_h", self.gradient_h),
            scheme=require_choice(
                "gradient_scheme", self.gradient_scheme, ("forward", "central")
            ),
        )
        return solve_form(
            problem,
            max_iter=self.max_iter,
            tol=self.tol,
            gradient_settings=settings,
            start=self.start,
        )
