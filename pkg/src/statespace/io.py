"""CSV ingestion/output and the JSON model artifact."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from . import __version__
from .builders import LINEAR_TREND, LOCAL_LEVEL, STRUCTURAL, linear_trend, local_level, structural
from .exceptions import ArtifactError, StateSpaceError
from .kalman import FilterConfig
from .model import USER_DEFINED, NoiseCovariances, StateSpaceModel

MISSING_TOKENS = {"", "nan", "na"}
LABEL_COLUMNS = {"date", "t"}
ARTIFACT_FORMAT = "statespace-model"
ARTIFACT_VERSION = 1


class CsvSeries(NamedTuple):
    values: np.ndarray
    names: list
    labels: Optional[list]
    label_name: Optional[str]


def load_csv(path) -> CsvSeries:
    """Read a header-first CSV: one row per period, one column per variable.

    Empty cells and ``NaN``/``NA`` are missing. A leading ``date`` or ``t``
    column is kept as row labels.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise StateSpaceError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    width = len(header)
    label_name = header[0] if header[0].lower() in LABEL_COLUMNS else None
    first = 1 if label_name else 0
    names = header[first:]
    if not names:
        raise StateSpaceError(f"{path}: no data columns")
    labels = [] if label_name else None
    data = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:]):
        lineno = i + 2
        if len(row) != width:
            raise StateSpaceError(f"{path}: row {lineno} has {len(row)} fields, expected {width}")
        if label_name:
            labels.append(row[0].strip())
        for j, cell in enumerate(row[first:]):
            cell = cell.strip()
            if cell.lower() in MISSING_TOKENS:
                data[i, j] = np.nan
                continue
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise StateSpaceError(
                    f"{path}: row {lineno}, column {names[j]!r}: non-numeric value {cell!r}") from None
    return CsvSeries(data, names, labels, label_name)


def fmt(x) -> str:
    """17 significant digits, round-trip exact for doubles; NaN written as ``NaN``."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    return f"{x:.17g}"


def write_csv(path, header, columns, labels=None, label_name="t"):
    """Write equal-length columns; ``labels`` defaults to 1..n."""
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0]) if columns else 0
    if labels is None:
        labels = [str(i + 1) for i in range(n)]
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([label_name] + list(header))
        for i in range(n):
            w.writerow([labels[i]] + [fmt(c[i]) for c in columns])


# -- matrices in JSON ----------------------------------------------------------


def matrix_to_json(a) -> Optional[dict]:
    if a is None:
        return None
    a = np.asarray(a, dtype=float)
    data = [None if math.isnan(x) else float(x) for x in a.ravel(order="C")]
    return {"dims": list(a.shape), "data": data}


def matrix_from_json(obj) -> Optional[np.ndarray]:
    if obj is None:
        return None
    if isinstance(obj, list):
        return np.asarray(obj, dtype=float)
    try:
        data = [np.nan if x is None else float(x) for x in obj["data"]]
        return np.array(data, dtype=float).reshape(obj["dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"malformed matrix entry: {exc}") from None


def load_matrices(path):
    """Read ``Z`` (2- or 3-dimensional), ``T`` and ``R`` for a user-defined model."""
    with Path(path).open() as fh:
        doc = json.load(fh)
    try:
        return tuple(matrix_from_json(doc[k]) for k in ("Z", "T", "R"))
    except KeyError as exc:
        raise StateSpaceError(f"{path}: matrices file lacks {exc.args[0]!r}") from None


def save_matrices(path, Z, T, R):
    doc = {k: matrix_to_json(v) for k, v in (("Z", Z), ("T", T), ("R", R))}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


# -- model artifact ------------------------------------------------------------


def build_model(kind, y, s=None, X=None, matrices=None) -> StateSpaceModel:
    if kind == LOCAL_LEVEL:
        return local_level(y)
    if kind == LINEAR_TREND:
        return linear_trend(y)
    if kind == STRUCTURAL:
        if s is None:
            raise StateSpaceError("structural model needs a seasonal period s")
        return structural(y, s, X)
    if kind == USER_DEFINED:
        if matrices is None:
            raise StateSpaceError("user-defined model needs Z, T and R matrices")
        Z, T, R = matrices
        Z = np.asarray(Z, float)
        n = np.asarray(y).shape[0]
        Z_future = None
        if Z.ndim == 3 and Z.shape[0] > n:
            Z, Z_future = Z[:n], Z[n:]
        return StateSpaceModel(y, Z, T, R, Z_future=Z_future)
    raise StateSpaceError(f"unknown model kind {kind!r}")


def artifact_document(fitted, series: CsvSeries, config: dict) -> dict:
    model = fitted.model
    fc = fitted.filter_config
    matrices = None
    if model.kind == USER_DEFINED:
        Z = model.Z if model.Z_future is None else np.concatenate([model.Z, model.Z_future])
        matrices = {"Z": matrix_to_json(Z), "T": matrix_to_json(model.T), "R": matrix_to_json(model.R)}
    return {
        "format": ARTIFACT_FORMAT,
        "version": ARTIFACT_VERSION,
        "package_version": __version__,
        "config": config,
        "data": {
            "names": list(series.names),
            "labels": series.labels,
            "label_name": series.label_name,
            "y": matrix_to_json(model.y),
            "X": matrix_to_json(model.X),
        },
        "model": {
            "kind": model.kind,
            "s": model.seasonality,
            "dims": list(model.dims),
            "matrices": matrices,
        },
        "filter": {
            "variant": fitted.filter_type,
            "diffuse_scale": fc.diffuse_scale,
            "steady_state_tolerance": fc.steady_state_tolerance,
            "freeze_tolerance": fc.freeze_tolerance,
        },
        "optimization_method": fitted.optimization_method,
        "H": matrix_to_json(fitted.covariance.H),
        "Q": matrix_to_json(fitted.covariance.Q),
        "loglik": fitted.loglik,
        "steady_state": fitted.filter.steady_state,
        "steady_state_period": fitted.filter.steady_state_period,
        # wall-clock times are left out so repeated runs write identical files
        "trace": [{"seed": r.seed, "initial_loglik": _json_float(r.initial_loglik),
                   "loglik": _json_float(r.loglik), "iterations": r.n_iter} for r in fitted.trace],
    }


def _json_float(x):
    return x if math.isfinite(x) else None


def save_artifact(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n")


def load_artifact(path):
    """Rebuild ``(FittedStateSpace, CsvSeries, document)`` from an artifact file."""
    from .estimation import SeedResult, evaluate

    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read model artifact {path}: {exc}") from None
    if doc.get("format") != ARTIFACT_FORMAT:
        raise ArtifactError(f"{path} is not a {ARTIFACT_FORMAT} artifact")
    if doc.get("version") != ARTIFACT_VERSION:
        raise ArtifactError(
            f"{path}: artifact version {doc.get('version')} not supported (expected {ARTIFACT_VERSION})")
    data, mod = doc["data"], doc["model"]
    y = matrix_from_json(data["y"])
    X = matrix_from_json(data["X"])
    matrices = None
    if mod["matrices"] is not None:
        matrices = tuple(matrix_from_json(mod["matrices"][k]) for k in ("Z", "T", "R"))
    model = build_model(mod["kind"], y, mod["s"], X, matrices)
    f = doc["filter"]
    fc = FilterConfig(variant=f["variant"], diffuse_scale=f["diffuse_scale"],
                      steady_state_tolerance=f["steady_state_tolerance"],
                      freeze_tolerance=f["freeze_tolerance"])
    cov = NoiseCovariances(matrix_from_json(doc["H"]), matrix_from_json(doc["Q"]))
    trace = [SeedResult(r["seed"], _nan_if_none(r["initial_loglik"]), _nan_if_none(r["loglik"]),
                        np.array([]), r["iterations"], 0.0) for r in doc["trace"]]
    fitted = evaluate(model, cov, fc, doc["optimization_method"], trace)
    series = CsvSeries(y, data["names"], data["labels"], data["label_name"])
    return fitted, series, doc


def _nan_if_none(x):
    return float("nan") if x is None else x
