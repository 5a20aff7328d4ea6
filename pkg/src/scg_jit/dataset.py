from __future__ import annotations

import logging
import os
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import replace
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd

from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import read_table
from scg_jit.artifacts import provenance_comment
from scg_jit.errors import DataError
from scg_jit.errors import JoinError
from scg_jit.graph_metrics import FEATURE_NAMES

logger = logging.getLogger(__name__)

N_C = 15
N_SCG = len(FEATURE_NAMES)
C_COLUMNS = [f"c{i}" for i in range(1, N_C + 1)]
A_COLUMNS = [f"a{i}" for i in range(1, N_SCG + 1)]
D_COLUMNS = [f"d{i}" for i in range(1, N_SCG + 1)]
SIDE_COLUMNS = [f"f{i}" for i in range(1, N_SCG + 1)]
FEATURE_COLUMNS = C_COLUMNS + A_COLUMNS + D_COLUMNS
DATASET_COLUMNS = ["commit_id", "author_timestamp", *FEATURE_COLUMNS, "bug_label", "category_label"]
# integer columns that must be present in every row
LABEL_COLUMNS = ("author_timestamp", "bug_label", "category_label")

COMMIT_CATEGORIES: dict[int, str] = {
    0: "None",
    1: "Merge",
    2: "Corrective",
    3: "Preventive",
    4: "Feature Addition",
    5: "Non Functional",
    6: "Perfective",
}

Matrix = npt.NDArray[np.float64]


@dataclass(frozen=True)
class CommitRecord:
    commit_id: str
    author_timestamp: int
    c_features: tuple[float, ...]
    a_features: tuple[float, ...]
    d_features: tuple[float, ...]
    bug_label: int
    category_label: int = 0

    def __post_init__(self) -> None:
        if len(self.c_features) != N_C or len(self.a_features) != N_SCG or len(self.d_features) != N_SCG:
            raise DataError(f"{self.commit_id}: wrong number of feature values")
        if self.bug_label not in (0, 1):
            raise DataError(f"{self.commit_id}: bug_label must be 0 or 1, got {self.bug_label}")
        if self.category_label not in COMMIT_CATEGORIES:
            raise DataError(f"{self.commit_id}: category_label must be in 0..6, got {self.category_label}")

    @property
    def features(self) -> tuple[float, ...]:
        return self.c_features + self.a_features + self.d_features


@dataclass(frozen=True)
class FeatureCombination:
    tag: str
    columns: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.columns)


def _block(name: str) -> tuple[int, ...]:
    start = {"C": 0, "A": N_C, "D": N_C + N_SCG}[name]
    size = N_C if name == "C" else N_SCG
    return tuple(range(start, start + size))


COMBINATION_TAGS = ("C", "A", "D", "CA", "CD", "AD", "CAD")
COMBINATIONS: dict[str, FeatureCombination] = {
    tag: FeatureCombination(tag, tuple(i for part in tag for i in _block(part))) for tag in COMBINATION_TAGS
}


#############################################################################
### LOAD AND JOIN
#############################################################################


def _read_table(path: str | os.PathLike[str], required: Sequence[str]) -> pd.DataFrame:
    frame = read_table(path, dtype={"commit_id": str})
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise JoinError(f"{path}: missing column(s) {', '.join(missing)}")
    dupes = frame["commit_id"][frame["commit_id"].duplicated()]
    if len(dupes):
        raise JoinError(f"{path}: duplicate commit_id {dupes.iloc[0]}")
    if frame["commit_id"].isna().any():
        row = int(frame["commit_id"].isna().argmax()) + 1
        raise DataError(f"{path}: data row {row} has no commit_id")
    for column in LABEL_COLUMNS:
        if column in required:
            blank = frame["commit_id"][frame[column].isna()]
            if len(blank):
                raise DataError(f"{path}: missing {column} for commit {blank.iloc[0]}")
    return frame


def _side_frame(path: str | os.PathLike[str] | None, prefix: str) -> pd.DataFrame:
    columns = [f"{prefix}{i}" for i in range(1, N_SCG + 1)]
    if path is None:
        return pd.DataFrame(columns=["commit_id", *columns])
    frame = _read_table(path, ["commit_id", *SIDE_COLUMNS])
    return frame[["commit_id", *SIDE_COLUMNS]].rename(columns=dict(zip(SIDE_COLUMNS, columns)))


def load_and_join(
    c_csv: str | os.PathLike[str],
    a_csv: str | os.PathLike[str] | None,
    d_csv: str | os.PathLike[str] | None,
) -> list[CommitRecord]:
    """Left-join the A and D feature tables onto the C table.

    Commits without an A or D row get all-zero features for that side. The result is
    ordered by (author_timestamp, commit_id).
    """
    c_frame = _read_table(c_csv, ["commit_id", "author_timestamp", *C_COLUMNS, "bug_label", "category_label"])
    frame = c_frame[["commit_id", "author_timestamp", *C_COLUMNS, "bug_label", "category_label"]]
    for path, prefix in ((a_csv, "a"), (d_csv, "d")):
        side = _side_frame(path, prefix)
        orphans = ~side["commit_id"].isin(c_frame["commit_id"])
        if orphans.any():
            logger.warning(f"{path}: {int(orphans.sum())} feature row(s) without a commit in {c_csv}")
        frame = frame.merge(side, on="commit_id", how="left", validate="one_to_one")

    frame[A_COLUMNS + D_COLUMNS] = frame[A_COLUMNS + D_COLUMNS].astype(float).fillna(0.0)
    values = frame[FEATURE_COLUMNS].to_numpy(dtype=np.float64)
    if not np.isfinite(values).all():
        row = int(np.argwhere(~np.isfinite(values))[0, 0])
        raise DataError(f"{c_csv}: non-finite feature value for commit {frame['commit_id'].iloc[row]}")

    frame = frame.sort_values(["author_timestamp", "commit_id"], kind="stable").reset_index(drop=True)
    records = [_row_to_record(row) for row in frame.itertuples(index=False)]
    logger.debug(f"Joined {len(records)} commit(s)")
    return records


def _row_to_record(row: Any) -> CommitRecord:
    data = row._asdict()
    return CommitRecord(
        commit_id=str(data["commit_id"]),
        author_timestamp=int(data["author_timestamp"]),
        c_features=tuple(float(data[c]) for c in C_COLUMNS),
        a_features=tuple(float(data[c]) for c in A_COLUMNS),
        d_features=tuple(float(data[c]) for c in D_COLUMNS),
        bug_label=int(data["bug_label"]),
        category_label=int(data["category_label"]),
    )


def records_to_frame(records: Sequence[CommitRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [(r.commit_id, r.author_timestamp, *r.features, r.bug_label, r.category_label) for r in records],
        columns=DATASET_COLUMNS,
    )


def read_dataset_csv(path: str | os.PathLike[str]) -> list[CommitRecord]:
    frame = _read_table(path, DATASET_COLUMNS)
    return [_row_to_record(row) for row in frame[DATASET_COLUMNS].itertuples(index=False)]


def write_dataset_csv(prov: dict[str, Any], records: Sequence[CommitRecord], path: str | os.PathLike[str]) -> None:
    with atomic_write(path) as f:
        f.write(provenance_comment(prov))
        records_to_frame(records).to_csv(f, index=False, lineterminator="\n", float_format="%.10g")


#############################################################################
### STANDARDIZATION AND PROJECTION
#############################################################################


def feature_matrix(records: Sequence[CommitRecord]) -> Matrix:
    if not records:
        return np.zeros((0, N_C + 2 * N_SCG))
    return np.array([r.features for r in records], dtype=np.float64)


def labels(records: Sequence[CommitRecord]) -> npt.NDArray[np.int64]:
    return np.array([r.bug_label for r in records], dtype=np.int64)


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-scoring with population standard deviations."""

    means: Matrix
    stdevs: Matrix

    @classmethod
    def fit(cls, X: Matrix) -> Standardizer:
        if len(X) == 0:
            raise DataError("Cannot fit a standardizer on an empty row set")
        # constant columns get sd 0 even when rounding leaves a tiny positive std
        stdevs = np.where(np.ptp(X, axis=0) == 0, 0.0, X.std(axis=0, ddof=0))
        return cls(X.mean(axis=0), stdevs)

    def transform_matrix(self, X: Matrix) -> Matrix:
        centered = X - self.means
        safe = np.where(self.stdevs > 0, self.stdevs, 1.0)
        return np.where(self.stdevs > 0, centered / safe, 0.0)

    def transform(self, records: Sequence[CommitRecord]) -> list[CommitRecord]:
        Z = self.transform_matrix(feature_matrix(records))
        out = []
        for r, z in zip(records, Z):
            values = tuple(float(v) for v in z)
            out.append(
                replace(
                    r,
                    c_features=values[:N_C],
                    a_features=values[N_C : N_C + N_SCG],
                    d_features=values[N_C + N_SCG :],
                )
            )
        return out


def standardize(
    records: Sequence[CommitRecord], fit_index: Sequence[int]
) -> tuple[list[CommitRecord], Matrix, Matrix]:
    """Z-score every feature column using the statistics of the rows in `fit_index`."""
    X = feature_matrix(records)
    scaler = Standardizer.fit(X[list(fit_index)])
    return scaler.transform(records), scaler.means, scaler.stdevs


def select_combination(
    records: Sequence[CommitRecord], combo: FeatureCombination | str
) -> tuple[Matrix, npt.NDArray[np.int64]]:
    if isinstance(combo, str):
        try:
            combo = COMBINATIONS[combo]
        except KeyError:
            raise DataError(f"Unknown feature combination {combo!r}") from None
    return feature_matrix(records)[:, list(combo.columns)], labels(records)
