from __future__ import annotations

import logging
import math
import os
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.spatial.distance import pdist
from scipy.spatial.distance import squareform

from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import provenance_comment
from scg_jit.dataset import CommitRecord
from scg_jit.errors import DataError
from scg_jit.errors import EmbeddingError
from scg_jit.errors import UsageError

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

ENTROPY_TOLERANCE = 1e-5
MAX_BISECTION_STEPS = 64
DISTANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch: int = 250
    early_exaggeration: float = 12.0
    exaggeration_iterations: int = 250
    min_gain: float = 0.01
    kl_every: int = 50
    max_points: int = 5000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.perplexity <= 1:
            raise UsageError(f"perplexity must be greater than 1, got {self.perplexity}")
        if self.iterations < 250:
            raise UsageError(f"iterations must be at least 250, got {self.iterations}")
        if self.max_points < 3:
            raise UsageError(f"max_points must be at least 3, got {self.max_points}")


@dataclass
class Embedding:
    coords: Array
    final_kl: float
    kl_trace: list[tuple[int, float]] = field(default_factory=list)
    # Rows of the input that were embedded, in input order
    sample_index: npt.NDArray[np.int64] = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def _row_affinities(d: Array, beta: float) -> tuple[Array, float]:
    """Gaussian affinities of one row and their Shannon entropy in nats."""
    shifted = d - d.min()
    p = np.exp(-shifted * beta)
    total = p.sum()
    entropy = math.log(total) + beta * float(shifted @ p) / total
    return p / total, entropy


def conditional_affinities(X: npt.ArrayLike, perplexity: float) -> Array:
    """Row-normalized Gaussian affinities whose per-row perplexity matches `perplexity`.

    The precision of each row is found by bisection until the entropy is within
    1e-5 nats of log(perplexity). The diagonal is zero.
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if n < 3:
        raise DataError(f"t-SNE needs at least 3 points, got {n}")
    if not 1 < perplexity < n:
        raise DataError(f"perplexity must lie in (1, {n}), got {perplexity}")

    D = np.maximum(squareform(pdist(X, "sqeuclidean")), DISTANCE_FLOOR)
    target = math.log(perplexity)
    P = np.zeros((n, n))
    for i in range(n):
        d = np.delete(D[i], i)
        beta, lo, hi = 1.0, 0.0, math.inf
        for _ in range(MAX_BISECTION_STEPS):
            row, entropy = _row_affinities(d, beta)
            if abs(entropy - target) < ENTROPY_TOLERANCE:
                break
            if entropy > target:
                lo = beta
                beta = beta * 2.0 if math.isinf(hi) else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (beta + lo) / 2.0
        P[i, np.arange(n) != i] = row
    return P


def joint_affinities(P_conditional: Array) -> Array:
    n = len(P_conditional)
    return (P_conditional + P_conditional.T) / (2.0 * n)


def _student_t_kernel(Y: Array) -> Array:
    num = 1.0 / (1.0 + squareform(pdist(Y, "sqeuclidean")))
    np.fill_diagonal(num, 0.0)
    return num


def student_t_affinities(Y: npt.ArrayLike) -> Array:
    """Low-dimensional joint affinities, normalized over all ordered pairs."""
    num = _student_t_kernel(np.asarray(Y, dtype=np.float64))
    return num / num.sum()


def kl_divergence(P: Array, Y: npt.ArrayLike) -> float:
    Q = student_t_affinities(Y)
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], np.finfo(float).tiny))))


def tsne_embed(X: npt.ArrayLike, config: TsneConfig = TsneConfig()) -> Embedding:
    """Exact t-SNE into two dimensions by gradient descent on KL(P || Q)."""
    X = np.asarray(X, dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    sample_index = np.arange(len(X))
    if len(X) > config.max_points:
        sample_index = np.sort(rng.choice(len(X), size=config.max_points, replace=False))
        logger.warning(f"Embedding a seeded sample of {config.max_points} out of {len(X)} points")
        X = X[sample_index]

    P = joint_affinities(conditional_affinities(X, config.perplexity))
    n = len(X)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace: list[tuple[int, float]] = []

    for it in range(1, config.iterations + 1):
        exaggeration = config.early_exaggeration if it <= config.exaggeration_iterations else 1.0
        momentum = config.momentum_early if it <= config.momentum_switch else config.momentum_late

        num = _student_t_kernel(Y)
        Q = num / num.sum()
        PQ = (exaggeration * P - Q) * num
        grad = 4.0 * (PQ.sum(axis=1)[:, None] * Y - PQ @ Y)
        if not np.isfinite(grad).all():
            raise EmbeddingError("Non-finite t-SNE gradient", iteration=it)

        inc = update * grad < 0.0
        gains[inc] += 0.2
        gains[~inc] *= 0.8
        np.clip(gains, config.min_gain, np.inf, out=gains)
        update = momentum * update - config.learning_rate * gains * grad
        Y = Y + update

        if it % config.kl_every == 0 or it == config.iterations:
            kl = kl_divergence(P, Y)
            trace.append((it, kl))
            logger.debug(f"t-SNE iteration {it}: KL {kl:.6f}")

    Y = Y - Y.mean(axis=0)
    return Embedding(Y, trace[-1][1], trace, sample_index)


def write_embedding_tsv(
    prov: dict[str, Any],
    records: Sequence[CommitRecord],
    embedding: Embedding,
    path: str | os.PathLike[str],
) -> None:
    """Write the coordinates with their labels; a subsampled embedding records the sample in the header."""
    rows = [records[i] for i in embedding.sample_index]
    if len(rows) < len(records):
        prov = {**prov, "sampling": {"sampled": len(rows), "of": len(records), "sample_seed": prov.get("seed")}}
    frame = pd.DataFrame(
        {
            "commit_id": [r.commit_id for r in rows],
            "x": embedding.coords[:, 0],
            "y": embedding.coords[:, 1],
            "bug_label": [r.bug_label for r in rows],
            "category_label": [r.category_label for r in rows],
        }
    )
    with atomic_write(path) as f:
        f.write(provenance_comment(prov))
        frame.to_csv(f, sep="\t", index=False, lineterminator="\n", float_format="%.10g")
