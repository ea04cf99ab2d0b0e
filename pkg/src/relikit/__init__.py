"""Structural reliability toolkit.

Five analysis engines over a shared probabilistic core:

* :class:`FormAnalysis` / :func:`solve_form` — design-point search (HL-RF).
* :class:`SubsetSimulation` / :func:`run_subset` — rare-event estimation by
  conditional MCMC over nested intermediate failure events.
* :class:`CrudeMonteCarlo` / :func:`crude_mcs` — direct sampling benchmark.
* :class:`GaussianRandomField` — separable 2D exponential-correlation fields.
* :class:`BayesianMvnImputer` / :func:`run_gibbs` — multivariate-normal
  Bayesian updating with missing-data imputation.

Limit states are text expressions over ``x1..xn`` parsed by :func:`parse`;
failure is ``g(x) <= 0`` everywhere.
"""

from .distributions import Marginal, mvn_logpdf, std_normal_cdf, std_normal_inv_cdf
from .errors import (
    ConfigError,
    DegenerateProblemError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    NotPositiveDefiniteError,
    NumericalDegeneracyError,
    RelikitError,
    ZeroGradientError,
)
from .expressions import (
    GradientSettings,
    LimitStateExpr,
    evaluate,
    gradient,
    parse,
    pretty,
)
from .form import FormAnalysis, FormResult, beta_from_pf, solve_form
from .gibbs import (
    BayesianMvnImputer,
    CellInterval,
    DataMatrix,
    GibbsConfig,
    PosteriorSamples,
    PriorSpec,
    missing_value_intervals,
    posterior_predictive,
    random_correlation,
    run_gibbs,
    sample_inverse_wishart,
)
from .linalg import CorrelationMatrix, LowerTriangularFactor, cholesky_lower
from .mcs import CrudeMonteCarlo, McsResult, crude_mcs
from .problem import ReliabilityProblem
from .randomfield import (
    CorrelationLengths,
    FieldEnsembleStats,
    FieldRealization,
    GaussianRandomField,
    GridSpec,
    build_axis_covariance,
    estimate_correlation,
    generate_ensemble,
    generate_field_chol,
    generate_field_spectral,
)
from .rng import RandomStream, sample_standard_normals
from .subset import (
    SubsetResult,
    SubsetSimulation,
    joint_walk_step,
    mmh_componentwise_step,
    run_subset,
    run_subset_study,
)
from .transforms import u_to_x, x_to_u

__version__ = "0.1.0"

__all__ = [
    "BayesianMvnImputer",
    "CellInterval",
    "ConfigError",
    "CorrelationLengths",
    "CorrelationMatrix",
    "CrudeMonteCarlo",
    "DataMatrix",
    "DegenerateProblemError",
    "EvaluationDomainError",
    "ExpressionSyntaxError",
    "FieldEnsembleStats",
    "FieldRealization",
    "FormAnalysis",
    "FormResult",
    "GaussianRandomField",
    "GibbsConfig",
    "GradientSettings",
    "GridSpec",
    "LimitStateExpr",
    "LowerTriangularFactor",
    "Marginal",
    "McsResult",
    "NotPositiveDefiniteError",
    "NumericalDegeneracyError",
    "PosteriorSamples",
    "PriorSpec",
    "RandomStream",
    "RelikitError",
    "ReliabilityProblem",
    "SubsetResult",
    "SubsetSimulation",
    "ZeroGradientError",
    "beta_from_pf",
    "build_axis_covariance",
    "cholesky_lower",
    "crude_mcs",
    "estimate_correlation",
    "evaluate",
    "generate_ensemble",
    "generate_field_chol",
    "generate_field_spectral",
    "gradient",
    "joint_walk_step",
    "missing_value_intervals",
    "mmh_componentwise_step",
    "mvn_logpdf",
    "parse",
    "posterior_predictive",
    "pretty",
    "random_correlation",
    "run_gibbs",
    "run_subset",
    "run_subset_study",
    "sample_inverse_wishart",
    "sample_standard_normals",
    "solve_form",
    "std_normal_cdf",
    "std_normal_inv_cdf",
    "u_to_x",
    "x_to_u",
]
