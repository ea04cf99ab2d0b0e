"""The common input to FORM, subset simulation, and crude Monte Carlo."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Marginal
from .expressions import LimitStateExpr, evaluate, parse
from .linalg import CorrelationMatrix
from .rng import RandomStream
from .transforms import u_to_x, x_to_u

__all__ = ["ReliabilityProblem"]


@dataclass(frozen=True)
class ReliabilityProblem:
    """Marginals, correlation, and a limit-state function g(x).

    Failure is the event g(x) <= 0 throughout the toolkit.
    """

    marginals: tuple[Marginal, ...]
    correlation: CorrelationMatrix
    limit_state: LimitStateExpr

    def __post_init__(self):
        marginals = tuple(self.marginals)
        object.__setattr__(self, "marginals", marginals)
        n = len(marginals)
        if n == 0:
            raise ValueError("at least one marginal is required")
        if self.correlation.dim != n:
            raise ValueError(
                f"correlation is {self.correlation.dim}x{self.correlation.dim} "
                f"but there are {n} marginals"
            )
        if self.limit_state.arity != n:
            raise ValueError(
                f"limit state has arity {self.limit_state.arity} "
                f"but there are {n} marginals"
            )

    @classmethod
    def from_text(
        cls,
        expression: str,
        marginals: list[Marginal],
        correlation=None,
    ) -> "ReliabilityProblem":
        """Build a problem from expression text; default correlation is identity."""
        n = len(marginals)
        if correlation is None:
            corr = CorrelationMatrix.identity(n)
        elif isinstance(correlation, CorrelationMatrix):
            corr = correlation
        else:
            corr = CorrelationMatrix(np.asarray(correlation, dtype=float))
        return cls(tuple(marginals), corr, parse(expression, n))

    @property
    def n(self) -> int:
        return len(self.marginals)

    @property
    def means(self) -> np.ndarray:
        return np.array([m.mean for m in self.marginals])

    @property
    def sds(self) -> np.ndarray:
        return np.array([m.sd for m in self.marginals])

    def g(self, x):
        return evaluate(self.limit_state, x)

    def to_u(self, x):
        return x_to_u(x, self.marginals, self.correlation.factor())

    def to_x(self, u):
        return u_to_x(u, self.marginals, self.correlation.factor())

    def sample(self, stream: RandomStream, count: int) -> np.ndarray:
        """Draw ``count`` points from the correlated input distribution."""
        z = stream.standard_normal((count, self.n))
        return self.to_x(z)
