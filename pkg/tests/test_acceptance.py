"""End-to-end checks on synthetic corpora; run with `nox -s acceptance`."""

from __future__ import annotations

import pandas as pd
import pytest

from scg_jit.dataset import load_and_join
from scg_jit.eval import run_matrix
from scg_jit.ml import ClassifierConfig
from scg_jit.ml import ClassifierKind
from scg_jit.stats import compare_f1_tables
from scg_jit.synth import SynthSpec
from scg_jit.synth import generate

pytestmark = pytest.mark.slow


def evaluate(seed, out_dir, rf_trees=100):
    files = generate(SynthSpec(n_commits=2000, buggy_fraction=0.23, c_overlap=0.9, seed=seed), out_dir)
    records = load_and_join(files.c_csv, files.a_csv, files.d_csv)
    configs = [ClassifierConfig(kind, rf_trees=rf_trees, seed=seed) for kind in ClassifierKind]
    return run_matrix(records, configs, ["C", "CAD"], workers=3)


def test_graph_features_improve_every_classifier(tmp_path):
    report = evaluate(7, tmp_path)
    for kind in ClassifierKind:
        cad = report.cells[kind.value, "CAD"]
        assert cad.f1 > report.cells[kind.value, "C"].f1
        assert cad.improvement_vs_C is not None and cad.improvement_vs_C >= 0.10


def test_improvement_is_significant_across_seeds(tmp_path):
    rows = []
    for seed in range(12):
        report = evaluate(seed, tmp_path / str(seed))
        rows += [(f"synth{seed}", c.classifier, c.combination, c.f1) for c in report.cells.values()]
    table = pd.DataFrame(rows, columns=["dataset", "classifier", "combination", "f1"])

    results = compare_f1_tables(table, against=["CAD"])
    assert len(results) == 3
    assert all(r["p_value"] < 0.05 for r in results)
