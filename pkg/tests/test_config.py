from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import pytest

from scg_jit.config import CommentMatcher
from scg_jit.config import ConfigEntry
from scg_jit.config import Configuration
from scg_jit.config import EnvInterpolation
from scg_jit.config import PipelineConfig
from scg_jit.config import PipelineConfigParser
from scg_jit.config.entries import _prompt
from scg_jit.errors import UsageError
from scg_jit.ml import ClassifierKind

DELIMITER = ["=", ":"]
COMMENT_PREFIXES = ["#", ";"]


def significant_lines(text):
    return [line.strip() for line in text.split("\n") if line.strip()]


#############################################################################
### PARSER
#############################################################################


def test_read(shared_datadir):
    parser = PipelineConfigParser()
    parser.read_string((shared_datadir / "comments.cfg").read_text())

    assert parser.sections() == ["classifiers"]
    assert parser.top_comment == "Evaluation settings\nshared by all datasets"
    assert parser.end_comment == "End of file comment"
    assert parser.get_comment("classifiers") == "Classifier section"
    assert parser.get_comment("classifiers", "RF_TREES") == "Trees per forest"
    assert parser.get_comment("classifiers", "knn_k") == "Neighbours of the\nk-nearest-neighbours classifier"
    assert parser.getint("classifiers", "knn_k") == 7


def test_write(shared_datadir, tmp_path):
    parser = PipelineConfigParser()
    parser.read(shared_datadir / "comments.cfg")

    output_path = tmp_path / "output.cfg"
    with open(output_path, "w") as f:
        parser.write(f)

    expected = (shared_datadir / "comments_result.cfg").read_text()
    assert significant_lines(output_path.read_text()) == significant_lines(expected)
    assert str(parser).strip() == output_path.read_text().strip()


def test_change_comment(shared_datadir):
    parser = PipelineConfigParser()
    parser.read_string((shared_datadir / "comments.cfg").read_text())

    parser.add_section("run", "Run settings")
    parser.set("run", "seed", "7", "Random seed")
    parser.set_comment("classifiers", comment="Classifier parameters")
    parser.set_comment("classifiers", "knn_k", comment="Neighbours")

    expected = (shared_datadir / "comments_changed.cfg").read_text()
    assert significant_lines(str(parser)) == significant_lines(expected)


def test_remove_comment():
    parser = PipelineConfigParser()
    parser.set("S", "x", "1", "note")
    assert parser.get_comment("S", "X") == "note"
    parser.set_comment("S", "x", None)
    assert parser.get_comment("S", "x") is None
    assert "#" not in str(parser)


def test_missing_files_are_skipped(tmp_path, shared_datadir):
    parser = PipelineConfigParser()
    assert parser.read([tmp_path / "absent.cfg", shared_datadir / "comments.cfg"]) == [
        str(shared_datadir / "comments.cfg")
    ]


def test_lists():
    assert PipelineConfigParser.split_to_list("[a, b,, c]") == ["a", "b", "c"]
    assert PipelineConfigParser.split_to_list("") == []
    assert PipelineConfigParser.list_to_str(["a", "b"]) == "a, b"
    assert PipelineConfigParser.split_to_list(" a, b ,,c ") == ["a", "b", "c"]


#############################################################################
### ENVIRONMENT INTERPOLATION
#############################################################################


def test_env_write_keeps_raw_values(shared_datadir):
    contents = (shared_datadir / "env.cfg").read_text()
    parser = PipelineConfigParser()
    parser.read_string(contents)

    assert str(parser).strip() == contents.strip()


def test_env_interpolation(shared_datadir, monkeypatch):
    monkeypatch.setenv("SCG_TEST_ROOT", "/srv")
    monkeypatch.setenv("SCG_TEST_FEATURES", "c.csv")

    parser = PipelineConfigParser(interpolation=EnvInterpolation())
    parser.read_string((shared_datadir / "env.cfg").read_text())

    assert parser.get("paths", "root") == "data"
    assert parser.get("paths", "patch_dir") == "data"
    assert parser.get("paths", "out_dir") == "/srv/data"
    assert parser.get("paths", "c_features") == "c.csv"
    assert parser.get("run", "dataset_name") == "data"
    assert parser.get("run", "report") == "/srv/data/c.csv"
    assert parser.get("run", "report", raw=True) == r"$SCG_TEST_ROOT/${paths:patch_dir}/${SCG_TEST_FEATURES}"


def test_env_references_can_be_set(monkeypatch):
    monkeypatch.setenv("SCG_TEST_ROOT", "/srv")
    parser = PipelineConfigParser()
    parser.set("S", "root", "$SCG_TEST_ROOT/data")
    parser.set("S", "braced", "${SCG_TEST_ROOT}/x")
    assert parser.get("S", "root") == "/srv/data"
    assert parser.get("S", "braced") == "/srv/x"

    with pytest.raises(ValueError):
        parser.set("S", "broken", "${unclosed")


#############################################################################
### COMMENT MATCHER
#############################################################################


@pytest.mark.parametrize(
    ("line", "expected"),
    [
        ("this = is", ("S", "this")),
        ("  \tthis = is", ("S", "this")),
        ("this:not", ("S", "this")),
        ("  \tthis:not", ("S", "this")),
        ("[This.not]", ("This.not", None)),
        ("  \t[This.not]", ("This.not", None)),
        ("; This is a = comment", (None, None)),
        ("  \t# This is [a.comment]", (None, None)),
        ("This not", None),
        ("  \tThis.not", None),
    ],
)
def test_comment_target(line, expected):
    matcher = CommentMatcher(delimiters=DELIMITER, comment_prefixes=COMMENT_PREFIXES)
    matches = list(matcher.iter_comments(f"[S]\n# note\n{line}\n"))

    if expected is None:
        assert matches == []
    else:
        (match,) = matches
        assert (match.section, match.option) == expected
        assert match.comment.split("\n")[0] == "note"


def test_leading_and_trailing_comments():
    matcher = CommentMatcher(delimiters=DELIMITER, comment_prefixes=COMMENT_PREFIXES)
    matches = list(matcher.iter_comments("# head\n\n[S]\nx = 1\n\n; tail\n"))
    assert [(m.comment, m.section, m.option) for m in matches] == [("head", None, None), ("tail", None, None)]


@pytest.mark.parametrize(
    ("text", "prefixed"),
    [("one", "# one"), ("one\ntwo", "# one\n# two"), ("# kept", "# kept"), ("", "#")],
)
def test_add_prefix(text, prefixed):
    assert CommentMatcher.add_prefix(text, "#") == prefixed


#############################################################################
### ENTRIES
#############################################################################


def test_unattached_entry():
    entry = ConfigEntry("S", "x", 1, "X", value_getter=int)
    assert entry.default == "1"
    with pytest.raises(ValueError, match="not attached"):
        entry.value


def test_entry_names_are_escaped():
    entry = ConfigEntry(" My Section ", "an option", "v", "X", value_getter=str)
    assert entry.key == "My_Section:an_option"


def test_prompt_needs_inquirerpy(mocker):
    mocker.patch.dict(sys.modules, {"InquirerPy": None})
    with pytest.raises(UsageError, match="cli"):
        _prompt("Value:", "1")


#############################################################################
### PIPELINE CONFIGURATION
#############################################################################


@pytest.fixture
def pipeline_config(shared_datadir, tmp_path, monkeypatch):
    monkeypatch.setenv("SCG_TEST_OUT", str(tmp_path))
    return PipelineConfig(shared_datadir / "pipeline.cfg").load()


def test_defaults(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        config = PipelineConfig(tmp_path / "absent.cfg").load()
    assert "not found" in caplog.text

    assert config.paths.patch_dir.value == Path("patches")
    assert config.run.seed.value is None
    assert config.run.train_fraction.value == 0.7
    assert config.classifiers.classifiers.value == ["lr", "rf", "knn"]
    assert config.classifiers.combinations.value == ["C", "A", "D", "CA", "CD", "AD", "CAD"]
    assert config.embed.combinations.value == ["C", "CAD"]
    assert config.synth.n_commits.value == 2000
    with pytest.raises(UsageError, match="seed"):
        config.require_seed()
    with pytest.raises(UsageError, match="seed"):
        config.synth_spec()


def test_load_pipeline_config(pipeline_config, tmp_path):
    config = pipeline_config

    assert config.paths.patch_dir.value == Path("/data/patches")
    assert config.paths.out_dir.value == tmp_path / "run1"
    assert config.paths.c_features.value == Path("/data/patches/c_features.csv")
    assert config.paths.out_dir.raw_value == "$SCG_TEST_OUT/run1"
    assert config.run.seed.value == 7
    assert config.run.train_fraction.value == 0.6
    assert config.run.workers.value == 1
    assert config.classifiers.classifiers.value == ["lr", "knn"]
    assert config.classifiers.combinations.value == ["C", "CAD"]
    assert config.run.seed.raw_value == "7"

    parser = config._config_parser
    assert parser.top_comment == "Pipeline settings used by the configuration tests"
    assert parser.get_comment("paths", "patch_dir") == "Directory with one <commit_id>.patch per commit and commits.csv"
    assert parser.get_comment("run", "seed") == "Random seed, required by eval, embed and synth"


def test_derived_configs(pipeline_config):
    configs = pipeline_config.classifier_configs()
    assert [c.kind for c in configs] == [ClassifierKind.LR, ClassifierKind.KNN]
    assert all(c.seed == 7 and c.rf_trees == 100 for c in configs)

    tsne = pipeline_config.tsne_config()
    assert (tsne.perplexity, tsne.iterations, tsne.seed) == (30.0, 1000, 7)

    spec = pipeline_config.synth_spec()
    assert (spec.n_commits, spec.buggy_fraction, spec.seed) == (2000, 0.23, 7)


def test_write_and_reload(pipeline_config, tmp_path):
    path = tmp_path / "written.cfg"
    pipeline_config.write(path)

    text = path.read_text()
    assert text.startswith("# Pipeline settings used by the configuration tests")
    assert "# Choices: lr, rf, knn" in text
    assert "[synth]" in text

    reloaded = PipelineConfig(path).load()
    for before, after in zip(pipeline_config.entries, reloaded.entries):
        assert before.key == after.key
        assert after.raw_value == (before.raw_value if before.raw_value is not None else before.default)
    assert reloaded.paths.out_dir.value == tmp_path / "run1"


def test_write_needs_path():
    with pytest.raises(ValueError):
        Configuration(None).write()


def test_set_value(pipeline_config):
    pipeline_config.run.workers.value = 3
    assert pipeline_config.run.workers.value == 3
    pipeline_config.classifiers.classifiers.value = ["knn", "RF"]
    assert pipeline_config.classifiers.classifiers.value == ["rf", "knn"]

    pipeline_config.run.train_fraction.value = None
    assert pipeline_config.run.train_fraction.value == 0.7

    with pytest.raises(ValueError):
        pipeline_config.run.workers.value = 0


def test_invalid_file_value(pipeline_config):
    pipeline_config._config_parser.set("run", "workers", "many")
    with pytest.raises(UsageError, match="run:workers"):
        pipeline_config.run.workers.value


def test_apply_overrides(pipeline_config):
    namespace = argparse.Namespace(seed=3, workers=None, classifiers="rf,lr", combos="CAD", n=500, perplexity=12.5)
    assert pipeline_config.apply_overrides(namespace) is pipeline_config

    assert pipeline_config.run.seed.value == 3
    assert pipeline_config.run.workers.value == 1
    assert pipeline_config.classifiers.classifiers.value == ["lr", "rf"]
    assert pipeline_config.classifiers.combinations.value == ["CAD"]
    assert pipeline_config.synth.n_commits.value == 500
    assert pipeline_config.embed.perplexity.value == 12.5


@pytest.mark.parametrize(
    ("overrides", "match"),
    [
        ({"workers": 0}, "--workers"),
        ({"seed": "abc"}, "--seed"),
        ({"train_fraction": -0.5}, "--train-fraction"),
        ({"classifiers": "svm"}, "svm"),
        ({"combos": "AC"}, "AC"),
    ],
)
def test_invalid_overrides(pipeline_config, overrides, match):
    with pytest.raises(UsageError, match=match):
        pipeline_config.apply_overrides(argparse.Namespace(**overrides))


def test_inquire(mocker, tmp_path, caplog):
    answers = {
        "Random seed, required by eval, embed and synth:": ["11"],
        "Worker processes for extract, features and eval:": ["0", "4"],
        "Classifiers to evaluate:": ["rf"],
    }

    def prompt(message, default, choices=None):
        if message in answers and answers[message]:
            return answers[message].pop(0)
        return default

    mock = mocker.patch("scg_jit.config.entries._prompt", side_effect=prompt)

    path = tmp_path / "scg.cfg"
    config = PipelineConfig(path)
    with caplog.at_level(logging.WARNING):
        config.inquire()
    config.write()

    assert mock.call_count == len(config.entries) + 1
    assert "run:workers" in caplog.text

    reloaded = PipelineConfig(path).load()
    assert reloaded.run.seed.value == 11
    assert reloaded.run.workers.value == 4
    assert reloaded.classifiers.classifiers.value == ["rf"]
    assert reloaded.embed.perplexity.value == 30.0
