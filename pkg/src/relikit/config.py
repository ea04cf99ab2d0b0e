"""JSON run-configuration loading with strict schema validation.

A configuration names exactly one analysis and provides the matching section:

    {"analysis": "form", "seed": 1, "output": "out/case1",
     "form": {"problem": {...}, "max_iter": 100}}

Unknown keys anywhere are errors; diagnostics carry a JSON-pointer-style path.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .distributions import Marginal
from .errors import ConfigError, ExpressionSyntaxError, NotPositiveDefiniteError
from .expressions import parse
from .gibbs import DataMatrix, PriorSpec
from .linalg import CorrelationMatrix
from .problem import ReliabilityProblem
from .randomfield import CorrelationLengths, GridSpec

__all__ = ["ProblemConfig", "load_config", "read_data_csv"]

ANALYSES = ("form", "subset", "mcs", "field", "gibbs")


@dataclass(frozen=True)
class ProblemConfig:
    """Validated run configuration for one analysis."""

    analysis: str
    section: dict
    seed: int
    output: str | None
    base_dir: str


def _require_keys(obj: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...]):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", path or "/")
    for key in obj:
        if key not in required and key not in optional:
            raise ConfigError(f"unknown key {key!r}", f"{path}/{key}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing required key {key!r}", path or "/")


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("expected a number", path)
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("expected an integer", path)
    return value


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError("expected a boolean", path)
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError("expected a string", path)
    return value


def _parse_marginal(obj, path: str) -> Marginal:
    _require_keys(obj, path, ("kind", "mean", "sd"), ())
    kind = _as_str(obj["kind"], f"{path}/kind")
    try:
        return Marginal(kind, _as_number(obj["mean"], f"{path}/mean"),
                        _as_number(obj["sd"], f"{path}/sd"))
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _parse_matrix(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise ConfigError("expected a matrix (list of lists)", path)
    try:
        return np.array(
            [[_as_number(v, f"{path}/{i}/{j}") for j, v in enumerate(row)]
             for i, row in enumerate(obj)],
            dtype=float,
        )
    except ValueError as exc:
        raise ConfigError("matrix rows must have equal length", path) from exc


def parse_problem(obj, path: str) -> ReliabilityProblem:
    _require_keys(obj, path, ("marginals", "limit_state"), ("correlation",))
    raw = obj["marginals"]
    if not isinstance(raw, list) or not raw:
        raise ConfigError("expected a non-empty list of marginals", f"{path}/marginals")
    marginals = [
        _parse_marginal(mo, f"{path}/marginals/{i}") for i, mo in enumerate(raw)
    ]
    n = len(marginals)
    if "correlation" in obj:
        matrix = _parse_matrix(obj["correlation"], f"{path}/correlation")
        try:
            correlation = CorrelationMatrix(matrix)
        except (ValueError, NotPositiveDefiniteError) as exc:
            raise ConfigError(str(exc), f"{path}/correlation") from exc
    else:
        correlation = CorrelationMatrix.identity(n)
    text = _as_str(obj["limit_state"], f"{path}/limit_state")
    try:
        expr = parse(text, n)
    except ExpressionSyntaxError:
        raise  # expression errors keep their own category
    try:
        return ReliabilityProblem(tuple(marginals), correlation, expr)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _validate_form(section, path):
    _require_keys(
        section, path, ("problem",),
        ("max_iter", "tol", "gradient_h", "gradient_scheme", "start"),
    )
    out = {"problem": parse_problem(section["problem"], f"{path}/problem")}
    if "max_iter" in section:
        out["max_iter"] = _as_int(section["max_iter"], f"{path}/max_iter")
    if "tol" in section:
        out["tol"] = _as_number(section["tol"], f"{path}/tol")
    if "gradient_h" in section:
        out["gradient_h"] = _as_number(section["gradient_h"], f"{path}/gradient_h")
    if "gradient_scheme" in section:
        out["gradient_scheme"] = _as_str(
            section["gradient_scheme"], f"{path}/gradient_scheme"
        )
    if "start" in section:
        raw = section["start"]
        if not isinstance(raw, list):
            raise ConfigError("expected a list of numbers", f"{path}/start")
        out["start"] = [_as_number(v, f"{path}/start/{i}") for i, v in enumerate(raw)]
    return out


def _validate_subset(section, path):
    _require_keys(
        section, path, ("problem",),
        ("n_samples", "p0", "max_levels", "proposal_std", "kernel", "save_samples"),
    )
    out = {"problem": parse_problem(section["problem"], f"{path}/problem")}
    for key, conv in (
        ("n_samples", _as_int),
        ("p0", _as_number),
        ("max_levels", _as_int),
        ("proposal_std", _as_number),
        ("kernel", _as_str),
        ("save_samples", _as_bool),
    ):
        if key in section:
            out[key] = conv(section[key], f"{path}/{key}")
    return out


def _validate_mcs(section, path):
    _require_keys(section, path, ("problem",), ("n_samples",))
    out = {"problem": parse_problem(section["problem"], f"{path}/problem")}
    if "n_samples" in section:
        out["n_samples"] = _as_int(section["n_samples"], f"{path}/n_samples")
    return out


def _validate_field(section, path):
    _require_keys(
        section, path, ("grid", "lengths"),
        ("method", "standardize", "n_realizations"),
    )
    grid_obj = section["grid"]
    _require_keys(grid_obj, f"{path}/grid", ("nx", "ny", "Lx", "Ly"), ())
    lengths_obj = section["lengths"]
    _require_keys(lengths_obj, f"{path}/lengths", ("lx", "ly"), ())
    try:
        grid = GridSpec(
            _as_int(grid_obj["nx"], f"{path}/grid/nx"),
            _as_int(grid_obj["ny"], f"{path}/grid/ny"),
            _as_number(grid_obj["Lx"], f"{path}/grid/Lx"),
            _as_number(grid_obj["Ly"], f"{path}/grid/Ly"),
        )
        lengths = CorrelationLengths(
            _as_number(lengths_obj["lx"], f"{path}/lengths/lx"),
            _as_number(lengths_obj["ly"], f"{path}/lengths/ly"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc
    out = {"grid": grid, "lengths": lengths}
    if "method" in section:
        out["method"] = _as_str(section["method"], f"{path}/method")
    if "standardize" in section:
        out["standardize"] = _as_bool(section["standardize"], f"{path}/standardize")
    if "n_realizations" in section:
        out["n_realizations"] = _as_int(
            section["n_realizations"], f"{path}/n_realizations"
        )
    return out


def _parse_prior(obj, path) -> PriorSpec:
    _require_keys(obj, path, (), ("mu0", "sigma0", "nu0", "psi0"))
    kwargs = {}
    if "mu0" in obj:
        raw = obj["mu0"]
        if not isinstance(raw, list):
            raise ConfigError("expected a list of numbers", f"{path}/mu0")
        kwargs["mu0"] = np.array(
            [_as_number(v, f"{path}/mu0/{i}") for i, v in enumerate(raw)]
        )
    if "sigma0" in obj:
        kwargs["sigma0"] = _parse_matrix(obj["sigma0"], f"{path}/sigma0")
    if "nu0" in obj:
        kwargs["nu0"] = _as_number(obj["nu0"], f"{path}/nu0")
    if "psi0" in obj:
        kwargs["psi0"] = _parse_matrix(obj["psi0"], f"{path}/psi0")
    return PriorSpec(**kwargs)


def _validate_gibbs(section, path, base_dir):
    _require_keys(
        section, path, ("data",),
        ("num_iterations", "burn_in", "prior", "level", "predictive_count"),
    )
    data_path = _as_str(section["data"], f"{path}/data")
    resolved = data_path if os.path.isabs(data_path) else os.path.join(base_dir, data_path)
    if not os.path.isfile(resolved):
        raise ConfigError(f"data file not found: {data_path}", f"{path}/data")
    out = {"data_path": resolved}
    for key, conv in (
        ("num_iterations", _as_int),
        ("burn_in", _as_int),
        ("level", _as_number),
        ("predictive_count", _as_int),
    ):
        if key in section:
            out[key] = conv(section[key], f"{path}/{key}")
    if "prior" in section:
        out["prior"] = _parse_prior(section["prior"], f"{path}/prior")
    return out


_VALIDATORS = {
    "form": _validate_form,
    "subset": _validate_subset,
    "mcs": _validate_mcs,
    "field": _validate_field,
}


def load_config(path: str) -> ProblemConfig:
    """Load and strictly validate a JSON run configuration."""
    if not os.path.isfile(path):
        raise ConfigError("file not found")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", "/")
    _require_keys(raw, "", ("analysis",), ANALYSES + ("seed", "output"))
    analysis = _as_str(raw["analysis"], "/analysis")
    if analysis not in ANALYSES:
        raise ConfigError(f"unknown analysis {analysis!r}", "/analysis")
    sections = [key for key in raw if key in ANALYSES]
    if sections != [analysis] and set(sections) != {analysis}:
        raise ConfigError(
            f"exactly the {analysis!r} section must be present, found {sections}", "/"
        )
    seed = 0
    if "seed" in raw:
        seed = _as_int(raw["seed"], "/seed")
    output = None
    if "output" in raw:
        output = _as_str(raw["output"], "/output")
    base_dir = os.path.dirname(os.path.abspath(path))
    section_raw = raw[analysis]
    if analysis == "gibbs":
        section = _validate_gibbs(section_raw, f"/{analysis}", base_dir)
    else:
        section = _VALIDATORS[analysis](section_raw, f"/{analysis}")
    return ProblemConfig(
        analysis=analysis, section=section, seed=seed, output=output, base_dir=base_dir
    )


def read_data_csv(path: str) -> DataMatrix:
    """Read an observation matrix: header row, empty or NA cells are missing."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError("data file is empty", "/gibbs/data") from None
        n = len(header)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n:
                raise ConfigError(
                    f"line {line_no}: expected {n} fields, got {len(row)}",
                    "/gibbs/data",
                )
            values = []
            for col, cell in enumerate(row):
                token = cell.strip()
                if token == "" or token.upper() == "NA":
                    values.append(np.nan)
                    continue
                try:
                    values.append(float(token))
                except ValueError:
                    raise ConfigError(
                        f"line {line_no}, column {header[col]!r}: "
                        f"not a number: {cell!r}",
                        "/gibbs/data",
                    ) from None
            rows.append(values)
    if not rows:
        raise ConfigError("data file has no observation rows", "/gibbs/data")
    try:
        return DataMatrix.from_array(np.array(rows, dtype=float))
    except ValueError as exc:
        raise ConfigError(str(exc), "/gibbs/data") from exc
