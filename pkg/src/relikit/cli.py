"""Command-line front end.

Five subcommands (``form``, ``subset``, ``mcs``, ``field``, ``gibbs``) each
take ``--config <path>`` plus optional ``--seed``, ``--output``, ``--quiet``,
``--threads``. Exit codes: 0 success, 1 user error (configuration or
expression), 2 numerical failure. Every error path emits a single line
``error: <category>: <detail>`` on stderr.

Summaries print ``key=value`` lines at 6 significant digits; CSV outputs are
written with full-precision values, comma delimiters, a header row, and LF
line endings so fixed seeds reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .config import ProblemConfig, load_config, read_data_csv
from .errors import ConfigError, ExpressionSyntaxError, RelikitError
from .expressions import GradientSettings
from .form import solve_form
from .gibbs import (
    GibbsConfig,
    missing_value_intervals,
    posterior_predictive,
    run_gibbs,
)
from .rng import RandomStream
from .mcs import crude_mcs
from .randomfield import (
    estimate_correlation,
    generate_ensemble,
    write_correlation_csv,
    write_field_csv,
)
from .subset import run_subset

__all__ = ["main", "run_cli"]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "undefined"
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(_fmt(v) for v in np.asarray(value).ravel())
    return f"{float(value):.6g}"


def _csv_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "undefined"
    if isinstance(value, (list, tuple, np.ndarray)):
        return ";".join(_csv_value(v) for v in np.asarray(value).ravel())
    return repr(float(value))


class _Reporter:
    def __init__(self, quiet: bool, output: str | None):
        self.quiet = quiet
        self.output = output
        if output:
            parent = os.path.dirname(output)
            if parent:
                os.makedirs(parent, exist_ok=True)
        self.summary: list[tuple[str, object]] = []

    def add(self, key: str, value) -> None:
        self.summary.append((key, value))
        if not self.quiet:
            print(f"{key}={_fmt(value)}")

    def write_summary(self) -> None:
        if self.output is None:
            return
        with open(f"{self.output}_summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["key", "value"])
            for key, value in self.summary:
                writer.writerow([key, _csv_value(value)])


def _run_form(cfg: ProblemConfig, seed: int, reporter: _Reporter) -> int:
    section = dict(cfg.section)
    problem = section.pop("problem")
    settings = GradientSettings(
        h=section.pop("gradient_h", 1e-5),
        scheme=section.pop("gradient_scheme", "forward"),
    )
    result = solve_form(problem, gradient_settings=settings, **section)
    reporter.add("analysis", "form")
    reporter.add("beta", result.beta)
    reporter.add("pf", result.pf)
    reporter.add("iterations", result.iterations)
    reporter.add("converged", result.converged)
    reporter.add("x_star", result.x_star)
    reporter.add("u_star", result.u_star)
    reporter.add("alpha", result.alpha)
    reporter.write_summary()
    if not result.converged:
        print("error: numeric: FORM did not converge within max_iter", file=sys.stderr)
        return 2
    return 0


def _run_subset(cfg: ProblemConfig, seed: int, reporter: _Reporter) -> int:
    section = dict(cfg.section)
    problem = section.pop("problem")
    save_samples = section.pop("save_samples", False)
    result = run_subset(
        problem, seed=seed, keep_level_samples=save_samples, **section
    )
    reporter.add("analysis", "subset")
    reporter.add("pf", result.pf)
    reporter.add("levels_used", result.levels_used)
    reporter.add("truncated", result.truncated)
    reporter.add("thresholds", result.thresholds)
    reporter.add("conditional_probs", result.conditional_probs)
    reporter.add("acceptance_rates", result.acceptance_rate_per_level)
    reporter.add("seed", result.seed)
    reporter.write_summary()
    if save_samples and reporter.output is not None:
        n = problem.n
        with open(f"{reporter.output}_samples.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["level"] + [f"x{i + 1}" for i in range(n)] + ["g"])
            for level, (points, g_vals) in enumerate(
                zip(result.level_samples, result.level_g), start=1
            ):
                for point, g_val in zip(points, g_vals):
                    writer.writerow(
                        [level]
                        + [repr(float(v)) for v in point]
                        + [repr(float(g_val))]
                    )
    if result.truncated:
        print(
            "error: numeric: level budget exhausted; pf is an upper bound",
            file=sys.stderr,
        )
        return 2
    return 0


def _run_mcs(cfg: ProblemConfig, seed: int, reporter: _Reporter, threads: int) -> int:
    section = dict(cfg.section)
    problem = section.pop("problem")
    result = crude_mcs(problem, seed=seed, threads=threads, **section)
    reporter.add("analysis", "mcs")
    reporter.add("pf_hat", result.pf_hat)
    reporter.add("beta_hat", result.beta_hat)
    reporter.add("n_samples", result.n_samples)
    reporter.add("n_failures", result.n_failures)
    reporter.add("std_error", result.std_error)
    reporter.add("ci95_lower", result.ci95[0])
    reporter.add("ci95_upper", result.ci95[1])
    reporter.write_summary()
    return 0


def _run_field(cfg: ProblemConfig, seed: int, reporter: _Reporter) -> int:
    section = dict(cfg.section)
    grid = section.pop("grid")
    lengths = section.pop("lengths")
    n_realizations = section.pop("n_realizations", 1)
    method = section.pop("method", "cholesky")
    standardize = section.pop("standardize", True)
    ensemble = generate_ensemble(
        grid, lengths, n_realizations, seed=seed, method=method,
        standardize=standardize,
    )
    reporter.add("analysis", "field")
    reporter.add("method", method)
    reporter.add("n_realizations", n_realizations)
    reporter.add("grid", [grid.ny, grid.nx])
    first = ensemble[0].values
    reporter.add("first_realization_mean", first.mean())
    reporter.add("first_realization_std", first.std(ddof=1))
    stats = None
    if n_realizations >= 2:
        stats = estimate_correlation(ensemble)
        reporter.add("estimated_lx", stats.length_x)
        reporter.add("estimated_ly", stats.length_y)
    reporter.write_summary()
    if reporter.output is not None:
        write_field_csv(ensemble[0], f"{reporter.output}_field.csv")
        if stats is not None:
            write_correlation_csv(
                f"{reporter.output}_corr_x.csv",
                stats.lags_x, stats.corr_x, np.exp(-stats.lags_x / lengths.lx),
            )
            write_correlation_csv(
                f"{reporter.output}_corr_y.csv",
                stats.lags_y, stats.corr_y, np.exp(-stats.lags_y / lengths.ly),
            )
    return 0


def _run_gibbs(cfg: ProblemConfig, seed: int, reporter: _Reporter) -> int:
    section = dict(cfg.section)
    data = read_data_csv(section.pop("data_path"))
    level = section.pop("level", 0.95)
    predictive_count = section.pop("predictive_count", 0)
    prior = section.pop("prior", None)
    config = GibbsConfig(
        num_iterations=section.pop("num_iterations", 2000),
        burn_in=section.pop("burn_in", 500),
        seed=seed,
    )
    samples = run_gibbs(data, config=config, prior=prior)
    m, n = data.shape
    mu_mean = samples.mu_samples.mean(axis=0)
    mu_sd = samples.mu_samples.std(axis=0, ddof=1)
    reporter.add("analysis", "gibbs")
    reporter.add("rows", m)
    reporter.add("columns", n)
    reporter.add("retained_draws", samples.n_retained)
    reporter.add("posterior_mean_mu", mu_mean)
    reporter.add("posterior_sd_mu", mu_sd)
    reporter.add("n_missing_cells", int(data.missing_mask.sum()))
    reporter.write_summary()
    if reporter.output is not None:
        with open(f"{reporter.output}_trace.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration"] + [f"mu_{j + 1}" for j in range(n)])
            for t in range(samples.n_retained):
                writer.writerow(
                    [t] + [repr(float(v)) for v in samples.mu_samples[t]]
                )
        with open(f"{reporter.output}_sigma.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["iteration"]
                + [f"sigma_{i + 1}{j + 1}" for i in range(n) for j in range(n)]
            )
            for t in range(samples.n_retained):
                writer.writerow(
                    [t]
                    + [repr(float(v)) for v in samples.sigma_samples[t].ravel()]
                )
        if data.missing_mask.any():
            intervals = missing_value_intervals(samples, level=level)
            with open(f"{reporter.output}_intervals.csv", "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["row", "column", "lower", "median", "upper"])
                for cell in intervals:
                    writer.writerow(
                        [cell.row, cell.col, repr(cell.lower),
                         repr(cell.median), repr(cell.upper)]
                    )
        if predictive_count > 0:
            draws = posterior_predictive(
                samples, predictive_count, RandomStream(seed).derive(3)
            )
            with open(f"{reporter.output}_predictive.csv", "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["draw"] + [f"y_{j + 1}" for j in range(n)])
                for i, row in enumerate(draws):
                    writer.writerow(
                        [i // predictive_count] + [repr(float(v)) for v in row]
                    )
    return 0


_RUNNERS = {
    "form": _run_form,
    "subset": _run_subset,
    "field": _run_field,
    "gibbs": _run_gibbs,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relikit",
        description="Structural reliability analyses driven by JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("form", "design-point search (reliability index and Pf)"),
        ("subset", "subset simulation for small failure probabilities"),
        ("mcs", "crude Monte Carlo failure-probability estimate"),
        ("field", "2D Gaussian random-field generation"),
        ("gibbs", "Bayesian multivariate-normal updating with missing data"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", required=True, help="JSON configuration path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the configured seed")
        p.add_argument("--output", default=None,
                       help="prefix for CSV outputs")
        p.add_argument("--quiet", action="store_true",
                       help="suppress the stdout summary")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads where supported (default 1)")
    return parser


def run_cli(argv: list[str] | None = None) -> int:
    """Entry point returning the process exit status."""
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.analysis != args.command:
            raise ConfigError(
                f"config describes analysis {cfg.analysis!r}, "
                f"but subcommand is {args.command!r}", "/analysis"
            )
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
    except ExpressionSyntaxError as exc:
        print(f"error: expression: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1

    seed = args.seed if args.seed is not None else cfg.seed
    output = args.output if args.output is not None else cfg.output
    reporter = _Reporter(args.quiet, output)
    try:
        if args.command == "mcs":
            return _run_mcs(cfg, seed, reporter, args.threads)
        return _RUNNERS[args.command](cfg, seed, reporter)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except RelikitError as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # loaded configs must never crash the process
        print(f"error: numeric: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
