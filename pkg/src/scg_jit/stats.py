from __future__ import annotations

import enum
import logging
import math
import os
from collections.abc import Iterable
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from scipy.special import betainc
from scipy.stats import norm
from scipy.stats import rankdata

from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import provenance_comment
from scg_jit.artifacts import read_table
from scg_jit.dataset import FEATURE_COLUMNS
from scg_jit.dataset import CommitRecord
from scg_jit.dataset import feature_matrix
from scg_jit.dataset import labels
from scg_jit.errors import DataError
from scg_jit.errors import UsageError

logger = logging.getLogger(__name__)

EXACT_LIMIT = 25


class Alternative(str, enum.Enum):
    TWO_SIDED = "two-sided"
    GREATER = "greater"
    LESS = "less"

    @classmethod
    def parse(cls, value: str | Alternative) -> Alternative:
        try:
            return cls(value)
        except ValueError:
            raise UsageError(f"Unknown alternative {value!r}") from None


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n_effective: int
    method: str  # "exact", "normal_approx" or "t_distribution"

    __test__ = False  # keep pytest from collecting this class


def welch_ttest(sample_a: Sequence[float], sample_b: Sequence[float]) -> TestResult:
    """Two-sided unequal-variance t-test.

    The p-value comes from the Student t survival function written as a regularized
    incomplete beta function of the Welch-Satterthwaite degrees of freedom.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise DataError(f"t-test needs at least two values per sample, got {len(a)} and {len(b)}")

    mean_diff = float(a.mean() - b.mean())
    qa = a.var(ddof=1) / len(a)
    qb = b.var(ddof=1) / len(b)
    se2 = float(qa + qb)
    n = len(a) + len(b)
    if se2 == 0.0:
        if mean_diff == 0.0:
            return TestResult(0.0, 1.0, n, "t_distribution")
        return TestResult(math.copysign(math.inf, mean_diff), 0.0, n, "t_distribution")

    t = mean_diff / math.sqrt(se2)
    df = se2**2 / (qa**2 / (len(a) - 1) + qb**2 / (len(b) - 1))
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TestResult(t, min(1.0, max(0.0, p)), n, "t_distribution")


def signed_rank_null_counts(doubled_ranks: Sequence[int]) -> npt.NDArray[np.int64]:
    """Number of sign assignments giving each value of 2 * W+.

    Counting is done by dynamic programming over the (integer) doubled ranks, which
    yields the same distribution as enumerating all 2^n assignments.
    """
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(
    paired_a: Sequence[float],
    paired_b: Sequence[float],
    alternative: str | Alternative = Alternative.TWO_SIDED,
) -> TestResult:
    """Wilcoxon signed-rank test on the differences `paired_a - paired_b`.

    Zero differences are dropped and tied magnitudes get average ranks. Up to 25
    nonzero differences the null distribution is exact; beyond that a normal
    approximation with continuity and tie correction is used. The reported statistic
    is min(W+, W-) for the two-sided test and W+ otherwise.
    """
    alternative = Alternative.parse(alternative)
    a = np.asarray(paired_a, dtype=np.float64)
    b = np.asarray(paired_b, dtype=np.float64)
    if len(a) != len(b) or len(a) == 0:
        raise DataError(f"Paired samples must be non-empty and of equal length, got {len(a)} and {len(b)}")

    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise DataError("no nonzero pairs")

    ranks = rankdata(np.abs(d), method="average")
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    statistic = min(w_plus, w_minus) if alternative is Alternative.TWO_SIDED else w_plus

    if n <= EXACT_LIMIT:
        doubled = [int(round(2 * r)) for r in ranks]
        counts = signed_rank_null_counts(doubled)
        cdf = np.cumsum(counts) / float(2**n)
        if alternative is Alternative.TWO_SIDED:
            p = 2.0 * cdf[int(round(2 * min(w_plus, w_minus)))]
        elif alternative is Alternative.LESS:
            p = cdf[int(round(2 * w_plus))]
        else:
            w2 = int(round(2 * w_plus))
            p = 1.0 - (cdf[w2 - 1] if w2 > 0 else 0.0)
        return TestResult(statistic, float(min(1.0, max(0.0, p))), n, "exact")

    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
    sd = math.sqrt(var)
    if alternative is Alternative.TWO_SIDED:
        z = max(0.0, abs(w_plus - mean) - 0.5) / sd
        p = 2.0 * float(norm.sf(z))
    elif alternative is Alternative.GREATER:
        p = float(norm.sf((w_plus - mean - 0.5) / sd))
    else:
        p = float(norm.cdf((w_plus - mean + 0.5) / sd))
    return TestResult(statistic, min(1.0, max(0.0, p)), n, "normal_approx")


#############################################################################
### TABLES
#############################################################################


def ttest_features(records: Sequence[CommitRecord]) -> dict[str, TestResult]:
    """Welch t-test of buggy against non-buggy values, per feature column."""
    X = feature_matrix(records)
    y = labels(records)
    return {name: welch_ttest(X[y == 1, j], X[y == 0, j]) for j, name in enumerate(FEATURE_COLUMNS)}


def read_f1_tables(paths: Iterable[str | os.PathLike[str]]) -> pd.DataFrame:
    frames = [read_table(p, dtype={"dataset": str}) for p in paths]
    if not frames:
        raise DataError("No F1 tables given")
    table = pd.concat(frames, ignore_index=True)
    missing = {"dataset", "classifier", "combination", "f1"} - set(table.columns)
    if missing:
        raise DataError(f"F1 table is missing column(s) {', '.join(sorted(missing))}")
    if table.duplicated(["dataset", "classifier", "combination"]).any():
        raise DataError("F1 tables contain duplicate (dataset, classifier, combination) rows")
    return table


def compare_f1_tables(
    table: pd.DataFrame,
    baseline: str = "C",
    against: Sequence[str] = ("CA", "CD", "CAD"),
    alternative: str | Alternative = Alternative.TWO_SIDED,
) -> list[dict[str, Any]]:
    """Signed-rank comparison of each combination against the baseline, per classifier.

    Pairs are formed by dataset; datasets lacking either F1 score are ignored.
    """
    rows = []
    for clf in dict.fromkeys(table["classifier"]):
        sub = table[table["classifier"] == clf]
        base = sub[sub["combination"] == baseline].set_index("dataset")["f1"]
        for combo in against:
            other = sub[sub["combination"] == combo].set_index("dataset")["f1"]
            paired = pd.concat([other, base], axis=1, join="inner", keys=["other", "base"]).sort_index()
            if paired.empty:
                continue
            comparison = f"{clf}: {baseline} vs {combo}"
            try:
                result = wilcoxon_signed_rank(paired["other"], paired["base"], alternative)
            except DataError as e:
                logger.warning(f"{comparison}: {e}")
                continue
            rows.append(
                {
                    "comparison": comparison,
                    "statistic": result.statistic,
                    "p_value": result.p_value,
                    "method": result.method,
                }
            )
    return rows


def write_stats_csv(prov: dict[str, Any], rows: Sequence[dict[str, Any]], path: str | os.PathLike[str]) -> None:
    frame = pd.DataFrame(rows, columns=["comparison", "statistic", "p_value", "method"])
    with atomic_write(path) as f:
        f.write(provenance_comment(prov))
        frame.to_csv(f, index=False, lineterminator="\n", float_format="%.10g")


def ttest_rows(results: dict[str, TestResult]) -> list[dict[str, Any]]:
    return [
        {"comparison": f"{name}: buggy vs clean", "statistic": r.statistic, "p_value": r.p_value, "method": r.method}
        for name, r in results.items()
    ]
