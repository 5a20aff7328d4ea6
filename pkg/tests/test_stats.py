from __future__ import annotations

import itertools
import logging

import numpy as np
import pandas as pd
import pytest
from hypothesis import assume
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as scipy_stats

from scg_jit.artifacts import provenance
from scg_jit.dataset import FEATURE_COLUMNS
from scg_jit.errors import DataError
from scg_jit.errors import UsageError
from scg_jit.stats import Alternative
from scg_jit.stats import compare_f1_tables
from scg_jit.stats import read_f1_tables
from scg_jit.stats import signed_rank_null_counts
from scg_jit.stats import ttest_features
from scg_jit.stats import ttest_rows
from scg_jit.stats import welch_ttest
from scg_jit.stats import wilcoxon_signed_rank
from scg_jit.stats import write_stats_csv


def enumerate_signed_rank(diffs, alternative):
    """p-value by walking all 2^n sign assignments of the ranked magnitudes."""
    d = np.array([x for x in diffs if x != 0], dtype=np.float64)
    doubled = [int(round(2 * r)) for r in scipy_stats.rankdata(np.abs(d))]
    observed = sum(r for r, x in zip(doubled, d) if x > 0)
    observed_minus = sum(doubled) - observed
    totals = [sum(r for r, s in zip(doubled, signs) if s) for signs in itertools.product((0, 1), repeat=len(d))]
    n = len(totals)
    if alternative == "two-sided":
        return min(1.0, 2 * sum(t <= min(observed, observed_minus) for t in totals) / n)
    if alternative == "less":
        return sum(t <= observed for t in totals) / n
    return sum(t >= observed for t in totals) / n


#############################################################################
### WILCOXON SIGNED-RANK
#############################################################################


@given(
    st.lists(st.integers(-4, 4), min_size=1, max_size=10),
    st.sampled_from(["two-sided", "greater", "less"]),
)
def test_exact_matches_enumeration(diffs, alternative):
    assume(any(diffs))
    result = wilcoxon_signed_rank(diffs, [0] * len(diffs), alternative)
    assert result.method == "exact"
    assert result.n_effective == sum(1 for d in diffs if d)
    assert result.p_value == pytest.approx(enumerate_signed_rank(diffs, alternative), abs=1e-12)


@pytest.mark.parametrize(
    ("n", "expected"),
    [(12, 0.00048828125), (6, 0.03125), (1, 1.0)],
)
def test_all_positive(n, expected):
    result = wilcoxon_signed_rank(np.arange(1, n + 1) + 0.5, np.zeros(n))
    assert result.p_value == pytest.approx(expected, abs=1e-12)
    assert result.statistic == 0.0


def test_alternating_differences():
    diffs = [1, -1] * 4
    assert wilcoxon_signed_rank(diffs, [0] * 8).p_value >= 0.7


def test_zero_differences_are_dropped():
    result = wilcoxon_signed_rank([1, 2, 3, 4], [1, 1, 1, 1])
    assert result.n_effective == 3
    with pytest.raises(DataError, match="no nonzero pairs"):
        wilcoxon_signed_rank([0.3, 0.4], [0.3, 0.4])


def test_mismatched_lengths():
    with pytest.raises(DataError):
        wilcoxon_signed_rank([1, 2], [1])
    with pytest.raises(UsageError):
        wilcoxon_signed_rank([1, 2], [0, 0], "sideways")


def test_symmetry():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=14), rng.normal(size=14)
    assert wilcoxon_signed_rank(a, b).p_value == pytest.approx(wilcoxon_signed_rank(b, a).p_value)
    assert wilcoxon_signed_rank(a, b, "greater").p_value == pytest.approx(wilcoxon_signed_rank(b, a, "less").p_value)


@pytest.mark.parametrize("n", [15, 40])
def test_shift_lowers_one_sided_p(n):
    diffs = np.random.default_rng(n).normal(size=n)
    p_values = [wilcoxon_signed_rank(diffs + c, np.zeros(n), Alternative.GREATER).p_value for c in np.linspace(0, 1, 11)]
    assert p_values == sorted(p_values, reverse=True)


def test_normal_approximation():
    result = wilcoxon_signed_rank(np.arange(1, 31), np.zeros(30))
    assert result.method == "normal_approx"
    assert result.p_value < 1e-5

    rng = np.random.default_rng(8)
    a, b = rng.normal(size=60), rng.normal(size=60)
    assert 0.0 < wilcoxon_signed_rank(a, b).p_value <= 1.0


def test_null_counts():
    counts = signed_rank_null_counts([2, 4, 6])
    assert counts.sum() == 8
    assert counts.tolist() == [1, 0, 1, 0, 1, 0, 2, 0, 1, 0, 1, 0, 1]


#############################################################################
### WELCH T-TEST
#############################################################################


def test_welch_identical_samples():
    result = welch_ttest([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0])
    assert result.statistic == 0.0
    assert result.p_value == pytest.approx(1.0)


def test_welch_shifted_samples():
    rng = np.random.default_rng(2)
    a = rng.normal(size=20) + 10
    b = rng.normal(size=25)
    result = welch_ttest(a, b)
    assert result.statistic > 0
    assert result.p_value < 1e-4


def test_welch_nearly_identical():
    assert welch_ttest([1, 2, 3, 4, 5], [1.01, 2.01, 3.01, 4.01, 5.01]).p_value > 0.5


@pytest.mark.parametrize("seed", range(5))
def test_welch_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=12)
    b = rng.normal(loc=0.5, scale=2.0, size=9)
    expected = scipy_stats.ttest_ind(a, b, equal_var=False)
    result = welch_ttest(a, b)
    assert result.statistic == pytest.approx(expected.statistic)
    assert result.p_value == pytest.approx(expected.pvalue)


def test_welch_constant_samples():
    assert welch_ttest([2, 2, 2], [2, 2]).p_value == 1.0
    result = welch_ttest([3, 3, 3], [2, 2])
    assert result.p_value == 0.0
    assert result.statistic == float("inf")
    with pytest.raises(DataError):
        welch_ttest([1.0], [1.0, 2.0])


def test_ttest_features(records):
    results = ttest_features(records)
    assert list(results) == FEATURE_COLUMNS
    assert all(r.p_value < 0.01 for r in results.values())
    rows = ttest_rows(results)
    assert rows[0]["comparison"] == "c1: buggy vs clean"


#############################################################################
### F1 TABLE COMPARISON
#############################################################################


@pytest.fixture
def f1_table():
    rows = []
    for i in range(12):
        base = 0.3 + 0.01 * i
        rows += [
            (f"d{i:02d}", "lr", "C", base),
            (f"d{i:02d}", "lr", "CA", base),
            (f"d{i:02d}", "lr", "CAD", base + 0.1 + 0.001 * i),
        ]
    return pd.DataFrame(rows, columns=["dataset", "classifier", "combination", "f1"])


def test_compare_f1_tables(f1_table, caplog):
    with caplog.at_level(logging.WARNING):
        rows = compare_f1_tables(f1_table)

    assert [r["comparison"] for r in rows] == ["lr: C vs CAD"]
    assert rows[0]["p_value"] == pytest.approx(0.00048828125)
    assert rows[0]["method"] == "exact"
    assert "lr: C vs CA" in caplog.text


def test_compare_pairs_by_dataset(f1_table):
    shuffled = f1_table.sample(frac=1.0, random_state=0)
    assert compare_f1_tables(shuffled) == compare_f1_tables(f1_table)
    one_sided = compare_f1_tables(f1_table[f1_table["dataset"] != "d00"], alternative="greater")
    assert one_sided[0]["p_value"] == pytest.approx(1 / 2**11)


def test_read_f1_tables(tmp_path, f1_table):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for path, part in ((first, f1_table[:18]), (second, f1_table[18:])):
        with open(path, "w") as f:
            f.write('# {"tool":"scg-jit"}\n')
            part.to_csv(f, index=False)

    table = read_f1_tables([first, second])
    assert len(table) == 36
    assert table["dataset"].iloc[0] == "d00"

    with pytest.raises(DataError, match="duplicate"):
        read_f1_tables([first, first])
    with pytest.raises(DataError):
        read_f1_tables([])


def test_write_stats_csv(tmp_path, f1_table):
    path = tmp_path / "stats.csv"
    write_stats_csv(provenance(None), compare_f1_tables(f1_table), path)
    frame = pd.read_csv(path, comment="#")
    assert list(frame.columns) == ["comparison", "statistic", "p_value", "method"]
    assert frame.loc[0, "comparison"] == "lr: C vs CAD"
