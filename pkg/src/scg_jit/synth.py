from __future__ import annotations

import dataclasses
import functools
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.optimize import brentq
from scipy.stats import truncnorm

from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import dump_json
from scg_jit.artifacts import provenance
from scg_jit.artifacts import provenance_comment
from scg_jit.dataset import C_COLUMNS
from scg_jit.dataset import COMMIT_CATEGORIES
from scg_jit.dataset import SIDE_COLUMNS
from scg_jit.errors import DataError
from scg_jit.graph_metrics import FEATURE_NAMES

logger = logging.getLogger(__name__)

MIN_COMMITS = 100
EPOCH_START = 1_262_304_000  # 2010-01-01T00:00:00Z

# Pooled A/D graph statistics of buggy and non-buggy commits, in FEATURE_NAMES order
BUGGY_MEANS = (56.05, 0.04, 23.05, 43.92, 1.62, 1.62, 12.3, 0.95, 87.84, 3.15, 2.47, 0.99)
BUGGY_STDEVS = (33.9, 0.04, 5.51, 13.08, 0.33, 0.33, 3.59, 0.17, 26.17, 0.85, 0.53, 0.19)
CLEAN_MEANS = (13.81, 0.05, 14.14, 23.76, 1.24, 1.24, 8.22, 0.82, 47.52, 2.46, 1.96, 0.77)
CLEAN_STDEVS = (9.76, 0.05, 5.97, 11.23, 0.48, 0.48, 3.9, 0.28, 22.47, 1.16, 0.81, 0.31)

COUNT_FEATURES = frozenset(
    ["num_cycles", "num_nodes", "num_edges", "max_degree", "min_degree", "sum_degree", "num_self_loops"]
)

# Commits per category over all subject systems (246,279 in total)
CATEGORY_COUNTS = (96_592, 22_428, 58_023, 13_640, 41_097, 7_192, 7_307)

# Opaque conventional features: shared location and scale of the 15 columns
C_MEAN = 5.0
C_STDEV = 2.0


@dataclass(frozen=True)
class SynthSpec:
    n_commits: int = 2000
    buggy_fraction: float = 0.23
    c_overlap: float = 0.9
    seed: int = 0
    buggy_means: tuple[float, ...] = BUGGY_MEANS
    buggy_stdevs: tuple[float, ...] = BUGGY_STDEVS
    clean_means: tuple[float, ...] = CLEAN_MEANS
    clean_stdevs: tuple[float, ...] = CLEAN_STDEVS

    def __post_init__(self) -> None:
        if self.n_commits < MIN_COMMITS:
            raise DataError(f"n_commits must be at least {MIN_COMMITS}, got {self.n_commits}")
        if not 0 < self.buggy_fraction < 1:
            raise DataError(f"buggy_fraction must lie in (0, 1), got {self.buggy_fraction}")
        if not 0 <= self.c_overlap <= 1:
            raise DataError(f"c_overlap must lie in [0, 1], got {self.c_overlap}")
        for name in ("buggy_means", "buggy_stdevs", "clean_means", "clean_stdevs"):
            if len(getattr(self, name)) != len(FEATURE_NAMES):
                raise DataError(f"{name} needs {len(FEATURE_NAMES)} values")
        if min(self.buggy_stdevs + self.clean_stdevs) <= 0:
            raise DataError("Standard deviations must be positive")
        if min(self.buggy_means + self.clean_means) <= 0:
            raise DataError("Means must be positive")
        density = FEATURE_NAMES.index("density")
        if max(self.buggy_means[density], self.clean_means[density]) >= 1:
            raise DataError("The density mean must be below 1")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def expected_value(name: str, loc: float, sd: float) -> float:
    """Mean of a generated feature column given the location of its zero-truncated normal.

    Counts are the expectation after rounding and density after clipping to [0, 1].
    """
    dist = truncnorm(-loc / sd, np.inf, loc=loc, scale=sd)
    if name in COUNT_FEATURES:
        # E[round X] = sum over k >= 1 of P(X >= k - 1/2)
        k = np.arange(1, int(max(loc, 0.0) + 12 * sd) + 2)
        return float(dist.sf(k - 0.5).sum())
    if name == "density":
        above = truncnorm((1.0 - loc) / sd, np.inf, loc=loc, scale=sd)
        return float(dist.mean() - dist.sf(1.0) * (above.mean() - 1.0))
    return float(dist.mean())


@functools.lru_cache(maxsize=None)
def calibrated_loc(name: str, mean: float, sd: float) -> float:
    """Location of the zero-truncated normal whose generated column has mean `mean`."""

    def gap(loc: float) -> float:
        return expected_value(name, loc, sd) - mean

    return float(brentq(gap, mean - 20 * sd, mean + 10 * sd + 1, xtol=1e-12))


def _draw(name: str, mean: float, sd: float, size: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
    loc = calibrated_loc(name, mean, sd)
    # one uniform per stratum of width 1/size, in random order
    u = (rng.permutation(size) + rng.random(size)) / size
    return truncnorm.ppf(u, -loc / sd, np.inf, loc=loc, scale=sd)


@dataclass(frozen=True)
class SynthOutput:
    c_csv: Path
    a_csv: Path
    d_csv: Path
    spec_json: Path


def _scg_side(spec: SynthSpec, buggy: npt.NDArray[np.bool_], rng: np.random.Generator) -> pd.DataFrame:
    n = len(buggy)
    columns = {}
    for j, name in enumerate(FEATURE_NAMES):
        values = np.empty(n)
        for mask, mean, sd in (
            (buggy, spec.buggy_means[j], spec.buggy_stdevs[j]),
            (~buggy, spec.clean_means[j], spec.clean_stdevs[j]),
        ):
            values[mask] = _draw(name, mean, sd, int(mask.sum()), rng)
        if name in COUNT_FEATURES:
            values = np.round(values)
        elif name == "density":
            values = np.clip(values, 0.0, 1.0)
        columns[SIDE_COLUMNS[j]] = values
    return pd.DataFrame(columns)


def generate(spec: SynthSpec, out_dir: str | os.PathLike[str]) -> SynthOutput:
    """Write a synthetic corpus (`c_features.csv`, `features_A.csv`, `features_D.csv`, `spec.json`).

    All randomness comes from a single generator seeded with `spec.seed`, so the same
    SynthSpec always yields byte-identical files.
    """
    out = Path(out_dir)
    rng = np.random.default_rng(spec.seed)
    n = spec.n_commits

    buggy = rng.random(n) < spec.buggy_fraction
    timestamps = EPOCH_START + np.cumsum(rng.integers(60, 86_400, size=n))
    weights = np.array(CATEGORY_COUNTS, dtype=np.float64)
    categories = rng.choice(len(COMMIT_CATEGORIES), size=n, p=weights / weights.sum())
    commit_ids = [f"synth{spec.seed}-{i:06d}" for i in range(n)]

    shift = (1.0 - spec.c_overlap) * C_STDEV
    c_values = rng.normal(C_MEAN, C_STDEV, size=(n, len(C_COLUMNS))) + shift * buggy[:, None]
    c_frame = pd.DataFrame(c_values, columns=C_COLUMNS)
    c_frame.insert(0, "author_timestamp", timestamps)
    c_frame.insert(0, "commit_id", commit_ids)
    c_frame["bug_label"] = buggy.astype(int)
    c_frame["category_label"] = categories

    a_frame = _scg_side(spec, buggy, rng)
    d_frame = _scg_side(spec, buggy, rng)
    for frame in (a_frame, d_frame):
        frame.insert(0, "commit_id", commit_ids)

    prov = provenance(spec.seed)
    result = SynthOutput(out / "c_features.csv", out / "features_A.csv", out / "features_D.csv", out / "spec.json")
    for frame, path in ((c_frame, result.c_csv), (a_frame, result.a_csv), (d_frame, result.d_csv)):
        with atomic_write(path) as f:
            f.write(provenance_comment(prov))
            frame.to_csv(f, index=False, lineterminator="\n", float_format="%.10g")
    dump_json(prov, {"spec": spec.to_dict()}, result.spec_json)

    logger.debug(f"Generated {n} synthetic commit(s), {int(buggy.sum())} buggy, into {out}")
    return result
