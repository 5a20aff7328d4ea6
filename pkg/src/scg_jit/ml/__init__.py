from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any
from typing import Union

import numpy as np
import numpy.typing as npt

from scg_jit.errors import TrainingError
from scg_jit.ml.config import ClassifierConfig
from scg_jit.ml.config import ClassifierKind
from scg_jit.ml.forest import ForestModel
from scg_jit.ml.forest import bootstrap_indices
from scg_jit.ml.forest import fit_forest
from scg_jit.ml.knn import NeighborsModel
from scg_jit.ml.knn import fit_knn
from scg_jit.ml.logistic import LogisticModel
from scg_jit.ml.logistic import fit_logistic

logger = logging.getLogger(__name__)

Estimator = Union[LogisticModel, ForestModel, NeighborsModel]


@dataclass(frozen=True)
class TrainedModel:
    config: ClassifierConfig
    estimator: Estimator
    n_features: int

    @property
    def kind(self) -> ClassifierKind:
        return self.config.kind


def train(config: ClassifierConfig, X: npt.ArrayLike, y: npt.ArrayLike) -> TrainedModel:
    """Fit the classifier described by `config` on standardized features."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise TrainingError(f"Feature matrix {X.shape} does not match {len(y)} label(s)")
    if len(y) < 2:
        raise TrainingError("At least two training rows are required")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("Labels must be 0 or 1")
    if config.kind is not ClassifierKind.KNN and len(np.unique(y)) < 2:
        raise TrainingError(f"{config.kind.value}: training set contains a single class")

    estimator: Estimator
    if config.kind is ClassifierKind.LR:
        estimator = fit_logistic(X, y, l2=config.lr_l2, max_iter=config.lr_max_iter)
    elif config.kind is ClassifierKind.RF:
        estimator = fit_forest(X, y, n_trees=config.rf_trees, max_depth=config.rf_max_depth, seed=config.seed)
    else:
        estimator = fit_knn(X, y, k=config.knn_k)
    return TrainedModel(config, estimator, X.shape[1])


def predict(model: TrainedModel, X: npt.ArrayLike) -> npt.NDArray[np.int64]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise TrainingError(f"Expected {model.n_features} feature column(s), got shape {X.shape}")
    return model.estimator.predict(X)


def dump_model(model: TrainedModel) -> dict[str, Any]:
    """Debug representation of a trained model; not a stable format."""
    est = model.estimator
    params: dict[str, Any]
    if isinstance(est, LogisticModel):
        params = {
            "weights": est.weights.tolist(),
            "bias": est.bias,
            "iterations": est.iterations,
            "converged": est.converged,
        }
    elif isinstance(est, ForestModel):
        params = {
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in est.trees
            ]
        }
    else:
        params = {"n_train": len(est.X), "k": est.k}
    return {"kind": model.kind.value, "config": model.config.to_dict(), "parameters": params}


__all__ = [
    "ClassifierConfig",
    "ClassifierKind",
    "TrainedModel",
    "bootstrap_indices",
    "dump_model",
    "predict",
    "train",
]
