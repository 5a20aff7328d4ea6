from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

Array = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]

# Upper bound on query-by-train distance entries held in memory at once
CHUNK_CELLS = 1_000_000


@dataclass(frozen=True)
class NeighborsModel:
    X: Array
    y: IntArray
    k: int

    def neighbors(self, Q: Array) -> IntArray:
        """Indices of the k nearest training rows per query, nearest first.

        Equal distances are ordered by training-row index.
        """
        k = min(self.k, len(self.X))
        chunk = max(1, CHUNK_CELLS // max(1, len(self.X)))
        out = np.empty((len(Q), k), dtype=np.int64)
        for start in range(0, len(Q), chunk):
            block = Q[start : start + chunk]
            d2 = cdist(block, self.X, "sqeuclidean")
            out[start : start + len(block)] = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return out

    def predict(self, Q: Array) -> IntArray:
        nn = self.neighbors(Q)
        votes = self.y[nn].sum(axis=1)
        k = nn.shape[1]
        pred = np.where(2 * votes > k, 1, 0)
        tie = 2 * votes == k
        pred[tie] = self.y[nn[tie, 0]]
        return pred.astype(np.int64)


def fit_knn(X: Array, y: IntArray, k: int = 5) -> NeighborsModel:
    return NeighborsModel(np.array(X, dtype=np.float64), np.array(y, dtype=np.int64), k)
