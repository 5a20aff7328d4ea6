from __future__ import annotations

import json
import logging
import math
import os
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd

from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import provenance_comment
from scg_jit.dataset import COMBINATIONS
from scg_jit.dataset import CommitRecord
from scg_jit.dataset import Standardizer
from scg_jit.dataset import feature_matrix
from scg_jit.dataset import labels
from scg_jit.errors import CellError
from scg_jit.errors import ScgError
from scg_jit.errors import SplitError
from scg_jit.ml import ClassifierConfig
from scg_jit.ml import dump_model
from scg_jit.ml import predict
from scg_jit.ml import train

logger = logging.getLogger(__name__)

IMPROVED_COMBINATIONS = ("CA", "CD", "CAD")
BASELINE = "C"


def time_ordered_split(
    records: Sequence[CommitRecord], train_fraction: float = 0.7
) -> tuple[list[CommitRecord], list[CommitRecord]]:
    """Train on the oldest floor(train_fraction * n) commits, test on the rest."""
    if not 0 < train_fraction < 1:
        raise SplitError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    keys = [(r.author_timestamp, r.commit_id) for r in records]
    if any(a > b for a, b in zip(keys, keys[1:])):
        raise SplitError("Records are not sorted by (author_timestamp, commit_id)")
    n_train = math.floor(Fraction(repr(train_fraction)) * len(records))
    if n_train == 0 or n_train == len(records):
        raise SplitError(f"Split of {len(records)} record(s) at {train_fraction} leaves an empty partition")
    return list(records[:n_train]), list(records[n_train:])


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def improvement(f1: float, f1_baseline: float) -> float | None:
    """Relative F1 change against the baseline; None when the baseline F1 is 0 but `f1` is not."""
    if f1_baseline == 0:
        return 0.0 if f1 == 0 else None
    return (f1 - f1_baseline) / f1_baseline


@dataclass
class CellResult:
    classifier: str
    combination: str
    tp: int
    tn: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    improvement_vs_C: float | None = None

    @classmethod
    def from_predictions(
        cls, classifier: str, combination: str, y_true: npt.NDArray[np.int64], y_pred: npt.NDArray[np.int64]
    ) -> CellResult:
        tp = int(np.sum((y_pred == 1) & (y_true == 1)))
        tn = int(np.sum((y_pred == 0) & (y_true == 0)))
        fp = int(np.sum((y_pred == 1) & (y_true == 0)))
        fn = int(np.sum((y_pred == 0) & (y_true == 1)))
        return cls(classifier, combination, tp, tn, fp, fn, *precision_recall_f1(tp, fp, fn))


@dataclass
class EvalReport:
    cells: dict[tuple[str, str], CellResult]
    n_train: int
    n_test: int
    train_end_timestamp: int
    test_start_timestamp: int
    models: dict[tuple[str, str], dict[str, Any]] = field(default_factory=dict)

    def classifiers(self) -> list[str]:
        return list(dict.fromkeys(c for c, _ in self.cells))

    def combinations(self) -> list[str]:
        return list(dict.fromkeys(k for _, k in self.cells))

    def to_json(self) -> dict[str, Any]:
        results: dict[str, dict[str, Any]] = {}
        for (clf, combo), cell in self.cells.items():
            entry = {k: v for k, v in asdict(cell).items() if k not in ("classifier", "combination")}
            results.setdefault(clf, {})[combo] = entry
        return {
            "split": {
                "n_train": self.n_train,
                "n_test": self.n_test,
                "train_end_timestamp": self.train_end_timestamp,
                "test_start_timestamp": self.test_start_timestamp,
            },
            "results": results,
        }


def _run_cell(
    config: ClassifierConfig,
    combination: str,
    X_train: npt.NDArray[np.float64],
    y_train: npt.NDArray[np.int64],
    X_test: npt.NDArray[np.float64],
    y_test: npt.NDArray[np.int64],
    keep_model: bool,
) -> tuple[CellResult, dict[str, Any] | None]:
    clf = config.kind.value
    try:
        columns = list(COMBINATIONS[combination].columns)
        model = train(config, X_train[:, columns], y_train)
        y_pred = predict(model, X_test[:, columns])
    except ScgError as e:
        raise CellError(clf, combination, e) from e
    cell = CellResult.from_predictions(clf, combination, y_test, y_pred)
    logger.debug(f"{clf}/{combination}: f1={cell.f1:.4f}")
    return cell, dump_model(model) if keep_model else None


def run_matrix(
    records: Sequence[CommitRecord],
    configs: Sequence[ClassifierConfig],
    combinations: Sequence[str] = tuple(COMBINATIONS),
    train_fraction: float = 0.7,
    workers: int = 1,
    keep_models: bool = False,
) -> EvalReport:
    """Evaluate every (classifier, combination) cell on one time-ordered split.

    The standardizer is fit on the training rows only. Results do not depend on
    `workers`: each cell is a pure function of its inputs and the config seed.
    """
    train_rows, test_rows = time_ordered_split(records, train_fraction)
    scaler = Standardizer.fit(feature_matrix(train_rows))
    X_train = scaler.transform_matrix(feature_matrix(train_rows))
    X_test = scaler.transform_matrix(feature_matrix(test_rows))
    y_train, y_test = labels(train_rows), labels(test_rows)

    jobs = [(config, combo) for config in configs for combo in combinations]
    args = [(cfg, combo, X_train, y_train, X_test, y_test, keep_models) for cfg, combo in jobs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell_star, args))
    else:
        outcomes = [_run_cell(*a) for a in args]

    cells = {(c.classifier, c.combination): c for c, _ in outcomes}
    models = {(c.classifier, c.combination): m for c, m in outcomes if m is not None}
    for (clf, combo), cell in cells.items():
        if combo in IMPROVED_COMBINATIONS and (clf, BASELINE) in cells:
            cell.improvement_vs_C = improvement(cell.f1, cells[clf, BASELINE].f1)

    logger.debug(f"Evaluated {len(cells)} cell(s) on {len(train_rows)}/{len(test_rows)} train/test rows")
    return EvalReport(
        cells=cells,
        n_train=len(train_rows),
        n_test=len(test_rows),
        train_end_timestamp=train_rows[-1].author_timestamp,
        test_start_timestamp=test_rows[0].author_timestamp,
        models=models,
    )


def _run_cell_star(args: tuple[Any, ...]) -> tuple[CellResult, dict[str, Any] | None]:
    return _run_cell(*args)


def write_report(prov: dict[str, Any], report: EvalReport, path: str | os.PathLike[str]) -> None:
    with atomic_write(path) as f:
        json.dump({"provenance": prov, **report.to_json()}, f, indent=2, sort_keys=True)
        f.write("\n")


def write_models(prov: dict[str, Any], report: EvalReport, path: str | os.PathLike[str]) -> None:
    models: dict[str, dict[str, Any]] = {}
    for (clf, combo), dump in report.models.items():
        models.setdefault(clf, {})[combo] = dump
    with atomic_write(path) as f:
        json.dump({"provenance": prov, "models": models}, f, indent=2, sort_keys=True)
        f.write("\n")


F1_TABLE_COLUMNS = ["dataset", "classifier", "combination", "precision", "recall", "f1"]


def f1_frame(report: EvalReport, dataset: str) -> pd.DataFrame:
    return pd.DataFrame(
        [(dataset, c.classifier, c.combination, c.precision, c.recall, c.f1) for c in report.cells.values()],
        columns=F1_TABLE_COLUMNS,
    )


def write_f1_table(
    prov: dict[str, Any], report: EvalReport, path: str | os.PathLike[str], dataset: str = "dataset"
) -> None:
    with atomic_write(path) as f:
        f.write(provenance_comment(prov))
        f1_frame(report, dataset).to_csv(f, index=False, lineterminator="\n", float_format="%.10g")
