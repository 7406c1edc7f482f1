import json

import numpy as np
import pytest

from statespace import NoiseCovariances, evaluate, local_level, structural
from statespace.datasets import airline_passengers
from statespace.exceptions import ArtifactError, StateSpaceError
from statespace.io import (artifact_document, fmt, load_artifact, load_csv, load_matrices, matrix_from_json,
                           matrix_to_json, save_artifact, save_matrices, write_csv)


def test_airline_csv(tmp_path):
    labels, values = airline_passengers()
    path = tmp_path / "air.csv"
    write_csv(path, ["passengers"], [values], labels, "date")
    series = load_csv(path)
    assert series.values.shape == (144, 1)
    assert series.label_name == "date" and series.labels[0] == "1949-01"
    assert np.array_equal(series.values[:, 0], values)


def test_missing_tokens(tmp_path):
    path = tmp_path / "gap.csv"
    rows = ["t,y"] + [f"{i},{'NaN' if 10 <= i <= 20 else i * 0.5}" for i in range(1, 31)]
    rows[3] = "3,NA"
    rows[4] = "4,"
    path.write_text("\n".join(rows) + "\n")
    mask = np.isnan(load_csv(path).values[:, 0])
    assert np.flatnonzero(mask).tolist() == [2, 3] + list(range(9, 20))


def test_no_label_column(tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    series = load_csv(path)
    assert series.labels is None and series.names == ["a", "b"]
    assert np.array_equal(series.values, [[1, 2], [3, 4]])


@pytest.mark.parametrize("text,pattern", [
    ("t,y\n1,2\n2,3,4\n", "row 3"),
    ("t,y\n1,2\n2,abc\n", "row 3.*'abc'"),
    ("t\n1\n2\n", "no data columns"),
    ("", "empty"),
])
def test_csv_errors(tmp_path, text, pattern):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(StateSpaceError, match=pattern):
        load_csv(path)


def test_fmt_round_trips():
    rng = np.random.default_rng(0)
    for x in rng.normal(size=100) * 10.0 ** rng.integers(-20, 20, size=100):
        assert float(fmt(x)) == x
    assert fmt(float("nan")) == "NaN"


def test_matrix_json_round_trip(tmp_path):
    Z = np.arange(12.0).reshape(2, 3, 2)
    Z[0, 1, 1] = np.nan
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(Z))))
    assert np.array_equal(back, Z, equal_nan=True)
    save_matrices(tmp_path / "m.json", Z, np.eye(2), np.ones((2, 1)))
    Z2, T2, R2 = load_matrices(tmp_path / "m.json")
    assert np.array_equal(Z2, Z, equal_nan=True) and np.array_equal(R2, np.ones((2, 1)))


def test_artifact_round_trip(tmp_path):
    y = np.log(airline_passengers()[1][:48])
    X = np.linspace(0, 1, 60)[:, None]
    fitted = evaluate(structural(y, 12, X), NoiseCovariances([[0.01]], np.diag([1e-3, 1e-5, 1e-3])))
    from statespace.io import CsvSeries
    series = CsvSeries(y[:, None], ["y"], None, None)
    save_artifact(tmp_path / "model.json", artifact_document(fitted, series, {"command": "fit"}))
    back, series2, doc = load_artifact(tmp_path / "model.json")
    assert np.array_equal(back.covariance.Q, fitted.covariance.Q)
    assert back.model.future_periods == 12
    assert np.array_equal(back.smoother.alpha, fitted.smoother.alpha)
    assert back.loglik == fitted.loglik and doc["version"] == 1


def test_artifact_version_mismatch(tmp_path):
    fitted = evaluate(local_level(np.ones(5)), NoiseCovariances([[1.0]], [[1.0]]))
    from statespace.io import CsvSeries
    doc = artifact_document(fitted, CsvSeries(np.ones((5, 1)), ["y"], None, None), {})
    doc["version"] = 99
    save_artifact(tmp_path / "model.json", doc)
    with pytest.raises(ArtifactError, match="version 99"):
        load_artifact(tmp_path / "model.json")
    (tmp_path / "other.json").write_text('{"format": "something"}')
    with pytest.raises(ArtifactError):
        load_artifact(tmp_path / "other.json")
