from __future__ import annotations

import argparse
import logging
from typing import Any

from scg_jit.config.configuration import Configuration
from scg_jit.config.entries import ConfigEntry
from scg_jit.config.entries import ConfigEntryCollection
from scg_jit.config.entries import ConfigSection
from scg_jit.config.parser import StrPath
from scg_jit.dataset import COMBINATION_TAGS
from scg_jit.embed import TsneConfig
from scg_jit.errors import UsageError
from scg_jit.ml.config import ClassifierConfig
from scg_jit.ml.config import ClassifierKind
from scg_jit.synth import SynthSpec

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "scg.cfg"
CLASSIFIER_CHOICES = tuple(k.value for k in ClassifierKind)


def _optional_int(text: str) -> int | None:
    return int(text) if text.strip() else None


def _optional_int_str(value: int | None) -> str:
    return "" if value is None else str(value)


class PathsSection(ConfigEntryCollection):
    def __init__(self) -> None:
        section = ConfigSection("paths")
        self.patch_dir = section.PathOption("patch_dir", "patches", "Directory with one <commit_id>.patch per commit and commits.csv")
        self.c_features = section.PathOption("c_features", "c_features.csv", "CSV with the conventional commit features and labels")
        self.out_dir = section.PathOption("out_dir", "out", "Directory all artifacts are written to")


class RunSection(ConfigEntryCollection):
    def __init__(self) -> None:
        section = ConfigSection("run")
        self.seed: ConfigEntry[int | None] = ConfigEntry(
            "run",
            "seed",
            None,
            "Random seed, required by eval, embed and synth",
            value_getter=_optional_int,
            value_setter=_optional_int_str,
        )
        self.train_fraction = section.FloatOption(
            "train_fraction", 0.7, "Share of the oldest commits used for training", positive=True
        )
        self.workers = section.IntOption("workers", 1, "Worker processes for extract, features and eval", positive=True)
        self.dataset_name = section.Option("dataset_name", "dataset", "Name written to the dataset column of f1_table.csv")


class ClassifiersSection(ConfigEntryCollection):
    def __init__(self) -> None:
        section = ConfigSection("classifiers")
        self.classifiers = section.ChoiceListOption(
            "classifiers", CLASSIFIER_CHOICES, "Classifiers to evaluate", CLASSIFIER_CHOICES
        )
        self.combinations = section.ChoiceListOption(
            "combinations", COMBINATION_TAGS, "Feature combinations to evaluate", COMBINATION_TAGS
        )
        self.lr_max_iter = section.IntOption("lr_max_iter", 200, "Logistic regression iterations", positive=True)
        self.lr_l2 = section.FloatOption("lr_l2", 1.0, "Logistic regression inverse L2 strength", positive=True)
        self.rf_trees = section.IntOption("rf_trees", 100, "Random forest trees", positive=True)
        self.rf_max_depth = section.IntOption("rf_max_depth", 100, "Random forest maximum tree depth", positive=True)
        self.knn_k = section.IntOption("knn_k", 5, "Neighbours of the k-nearest-neighbours classifier", positive=True)


class EmbedSection(ConfigEntryCollection):
    def __init__(self) -> None:
        section = ConfigSection("embed")
        self.perplexity = section.FloatOption("perplexity", 30.0, "t-SNE perplexity", positive=True)
        self.iterations = section.IntOption("iterations", 1000, "t-SNE iterations (at least 250)", positive=True)
        self.learning_rate = section.FloatOption("learning_rate", 200.0, "t-SNE learning rate", positive=True)
        self.max_points = section.IntOption("max_points", 5000, "Larger datasets are subsampled to this size", positive=True)
        self.combinations = section.ChoiceListOption(
            "combinations", ("C", "CAD"), "Feature combinations to embed", COMBINATION_TAGS
        )


class SynthSection(ConfigEntryCollection):
    def __init__(self) -> None:
        section = ConfigSection("synth")
        self.n_commits = section.IntOption("n_commits", 2000, "Number of synthetic commits", positive=True)
        self.buggy_fraction = section.FloatOption("buggy_fraction", 0.23, "Share of buggy commits", positive=True)
        self.c_overlap = section.FloatOption("c_overlap", 0.9, "Overlap of buggy and clean conventional features, 1 = none")


class PipelineConfig(Configuration):
    """Seeds, paths and stage parameters shared by all subcommands."""

    # CLI flag (argparse dest) -> entry attribute path
    OVERRIDES = {
        "seed": ("run", "seed"),
        "train_fraction": ("run", "train_fraction"),
        "workers": ("run", "workers"),
        "dataset_name": ("run", "dataset_name"),
        "out_dir": ("paths", "out_dir"),
        "classifiers": ("classifiers", "classifiers"),
        "combos": ("classifiers", "combinations"),
        "perplexity": ("embed", "perplexity"),
        "n": ("synth", "n_commits"),
    }

    def __init__(self, path: StrPath | None = DEFAULT_CONFIG_FILE) -> None:
        self.paths = PathsSection()
        self.run = RunSection()
        self.classifiers = ClassifiersSection()
        self.embed = EmbedSection()
        self.synth = SynthSection()
        super().__init__(path)

    def _entry(self, section: str, name: str) -> ConfigEntry[Any]:
        entry = getattr(getattr(self, section), name)
        assert isinstance(entry, ConfigEntry)
        return entry

    def apply_overrides(self, namespace: argparse.Namespace) -> PipelineConfig:
        """Overlay the command-line flags that were given (non-None) onto the loaded values."""
        for dest, (section, name) in self.OVERRIDES.items():
            value = getattr(namespace, dest, None)
            if value is None:
                continue
            entry = self._entry(section, name)
            if not isinstance(value, str):
                value = entry.value_setter(value)
            try:
                entry.value_getter(value)
            except (TypeError, ValueError, UsageError) as e:
                raise UsageError(f"Invalid value {value!r} for --{dest.replace('_', '-')}: {e}") from e
            self._config_parser.set(section, name, value)
        return self

    def require_seed(self) -> int:
        seed = self.run.seed.value
        if seed is None:
            raise UsageError("A seed is required: pass --seed or set [run] seed in the config file")
        return seed

    def classifier_configs(self) -> list[ClassifierConfig]:
        seed = self.require_seed()
        c = self.classifiers
        return [
            ClassifierConfig(
                kind=ClassifierKind.parse(kind),
                lr_max_iter=c.lr_max_iter.value,
                lr_l2=c.lr_l2.value,
                rf_trees=c.rf_trees.value,
                rf_max_depth=c.rf_max_depth.value,
                knn_k=c.knn_k.value,
                seed=seed,
            )
            for kind in c.classifiers.value
        ]

    def tsne_config(self) -> TsneConfig:
        e = self.embed
        return TsneConfig(
            perplexity=e.perplexity.value,
            iterations=e.iterations.value,
            learning_rate=e.learning_rate.value,
            max_points=e.max_points.value,
            seed=self.require_seed(),
        )

    def synth_spec(self) -> SynthSpec:
        s = self.synth
        return SynthSpec(
            n_commits=s.n_commits.value,
            buggy_fraction=s.buggy_fraction.value,
            c_overlap=s.c_overlap.value,
            seed=self.require_seed(),
        )
