from __future__ import annotations

import json
import math
import pickle
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from hypothesis import HealthCheck
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from scg_jit.artifacts import provenance
from scg_jit.dataset import COMBINATIONS
from scg_jit.errors import CellError
from scg_jit.errors import SplitError
from scg_jit.errors import TrainingError
from scg_jit.eval import CellResult
from scg_jit.eval import improvement
from scg_jit.eval import precision_recall_f1
from scg_jit.eval import run_matrix
from scg_jit.eval import time_ordered_split
from scg_jit.eval import write_f1_table
from scg_jit.eval import write_models
from scg_jit.eval import write_report
from scg_jit.ml import ClassifierConfig
from scg_jit.ml import ClassifierKind


@pytest.fixture
def configs():
    return [
        ClassifierConfig(ClassifierKind.LR, seed=1),
        ClassifierConfig(ClassifierKind.RF, rf_trees=10, seed=1),
        ClassifierConfig(ClassifierKind.KNN, seed=1),
    ]


#############################################################################
### SPLIT
#############################################################################


@pytest.mark.parametrize(("n", "n_train"), [(10, 7), (3, 2), (100, 70), (11, 7)])
def test_split_sizes(make_records, n, n_train):
    train, test = time_ordered_split(make_records(n), 0.7)
    assert len(train) == n_train
    assert len(test) == n - n_train
    assert train[-1].author_timestamp <= test[0].author_timestamp


@given(st.integers(min_value=4, max_value=400))
@settings(suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_split_is_floor(make_records, n):
    train, test = time_ordered_split(make_records(n), 0.7)
    assert len(train) == 7 * n // 10
    assert len(train) + len(test) == n


def test_split_rejects_unsorted(records):
    with pytest.raises(SplitError, match="not sorted"):
        time_ordered_split(list(reversed(records)))


@pytest.mark.parametrize(("n", "fraction"), [(1, 0.7), (2, 0.3), (10, 1.0), (10, 0.0)])
def test_split_rejects_empty_partition(make_records, n, fraction):
    with pytest.raises(SplitError):
        time_ordered_split(make_records(n), fraction)


#############################################################################
### METRICS
#############################################################################


@pytest.mark.parametrize(
    ("counts", "expected"),
    [
        ((6, 2, 4), (0.75, 0.6, 0.6666666666666666)),
        ((0, 0, 0), (0.0, 0.0, 0.0)),
        ((0, 3, 5), (0.0, 0.0, 0.0)),
        ((5, 0, 0), (1.0, 1.0, 1.0)),
    ],
)
def test_precision_recall_f1(counts, expected):
    assert precision_recall_f1(*counts) == pytest.approx(expected)


@pytest.mark.parametrize(
    ("f1", "base", "expected"),
    [(0.60, 0.25, 1.4), (0.2, 0.4, -0.5), (0.5, 0.5, 0.0), (0.0, 0.0, 0.0), (0.3, 0.0, None)],
)
def test_improvement(f1, base, expected):
    result = improvement(f1, base)
    if expected is None:
        assert result is None
    else:
        assert result == pytest.approx(expected)


def test_cell_from_predictions():
    cell = CellResult.from_predictions("lr", "C", np.array([1, 1, 0, 0, 1]), np.array([1, 0, 0, 1, 1]))
    assert (cell.tp, cell.tn, cell.fp, cell.fn) == (2, 1, 1, 1)
    assert cell.f1 == pytest.approx(2 / 3)


#############################################################################
### EVALUATION MATRIX
#############################################################################


def test_run_matrix(records, configs):
    report = run_matrix(records, configs)

    assert len(report.cells) == 21
    assert report.classifiers() == ["lr", "rf", "knn"]
    assert report.combinations() == list(COMBINATIONS)
    assert (report.n_train, report.n_test) == (84, 36)
    assert report.train_end_timestamp < report.test_start_timestamp
    for (clf, combo), cell in report.cells.items():
        assert cell.tp + cell.tn + cell.fp + cell.fn == report.n_test
        assert 0.0 <= cell.f1 <= 1.0
        if combo in ("CA", "CD", "CAD"):
            assert cell.improvement_vs_C == improvement(cell.f1, report.cells[clf, "C"].f1)
        else:
            assert cell.improvement_vs_C is None


def test_run_matrix_separates_shifted_classes(records, configs):
    report = run_matrix(records, configs[:1], ["CAD"])
    assert report.cells["lr", "CAD"].f1 > 0.8


def test_test_rows_do_not_leak_into_training(records, configs, make_records):
    report = run_matrix(records, configs[:1], ["CAD"], keep_models=True)

    # Replace every test row's features and labels; the trained model must not change
    noise = make_records(len(records), seed=99, shift=-4.0)
    altered = records[:84] + [
        replace(r, c_features=o.c_features, a_features=o.a_features, d_features=o.d_features, bug_label=o.bug_label)
        for r, o in zip(records[84:], noise[84:])
    ]
    other = run_matrix(altered, configs[:1], ["CAD"], keep_models=True)

    assert other.models["lr", "CAD"]["parameters"] == report.models["lr", "CAD"]["parameters"]


def test_results_do_not_depend_on_workers(records, configs):
    serial = run_matrix(records, configs, ["C", "CAD"], workers=1)
    parallel = run_matrix(records, configs, ["C", "CAD"], workers=2)
    assert serial.to_json() == parallel.to_json()


def test_cell_failure(records, configs):
    clean = [replace(r, bug_label=0) for r in records[:84]] + records[84:]
    with pytest.raises(CellError) as excinfo:
        run_matrix(clean, configs[:1], ["C"])
    assert excinfo.value.classifier == "lr"
    assert isinstance(excinfo.value.cause, TrainingError)


def test_cell_error_pickles():
    error = pickle.loads(pickle.dumps(CellError("rf", "CD", TrainingError("boom"))))
    assert (error.classifier, error.combination) == ("rf", "CD")
    assert "boom" in str(error)


#############################################################################
### WRITERS
#############################################################################


def test_writers(tmp_path, records, configs):
    report = run_matrix(records, configs, ["C", "CD"], keep_models=True)
    prov = provenance(5)

    write_report(prov, report, tmp_path / "report.json")
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["provenance"]["seed"] == 5
    assert data["split"]["n_test"] == 36
    assert set(data["results"]) == {"lr", "rf", "knn"}
    assert set(data["results"]["rf"]["CD"]) >= {"tp", "fp", "precision", "f1", "improvement_vs_C"}

    write_f1_table(prov, report, tmp_path / "f1_table.csv", dataset="demo")
    text = (tmp_path / "f1_table.csv").read_text()
    assert text.startswith("# {")
    frame = pd.read_csv(tmp_path / "f1_table.csv", comment="#")
    assert list(frame.columns) == ["dataset", "classifier", "combination", "precision", "recall", "f1"]
    assert len(frame) == 6
    assert (frame["dataset"] == "demo").all()
    assert math.isclose(frame.loc[0, "f1"], report.cells["lr", "C"].f1, rel_tol=1e-9)

    write_models(prov, report, tmp_path / "models.json")
    models = json.loads((tmp_path / "models.json").read_text())["models"]
    assert models["knn"]["C"]["kind"] == "knn"
