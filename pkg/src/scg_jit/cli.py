from __future__ import annotations

import argparse
import logging
import os
from collections.abc import Callable
from collections.abc import Iterable
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import NoReturn
from typing import TypeVar

from scg_jit import __version__
from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import provenance
from scg_jit.config import DEFAULT_CONFIG_FILE
from scg_jit.config import PipelineConfig
from scg_jit.dataset import load_and_join
from scg_jit.dataset import read_dataset_csv
from scg_jit.dataset import select_combination
from scg_jit.dataset import standardize
from scg_jit.dataset import write_dataset_csv
from scg_jit.embed import tsne_embed
from scg_jit.embed import write_embedding_tsv
from scg_jit.errors import ScgError
from scg_jit.errors import UsageError
from scg_jit.eval import run_matrix
from scg_jit.eval import write_f1_table
from scg_jit.eval import write_models
from scg_jit.eval import write_report
from scg_jit.graph_metrics import GraphFeatureVector
from scg_jit.graph_metrics import MetricsResult
from scg_jit.graph_metrics import compute_metrics
from scg_jit.graph_metrics import write_feature_csv
from scg_jit.patch import CommitPatch
from scg_jit.patch import iter_patch_dir
from scg_jit.patch import split_changes
from scg_jit.scg import SIDES
from scg_jit.scg import SourceCodeGraph
from scg_jit.scg import extract_commit
from scg_jit.scg import graph_to_record
from scg_jit.scg import read_graphs_jsonl
from scg_jit.scg import write_graphs_jsonl
from scg_jit.stats import Alternative
from scg_jit.stats import compare_f1_tables
from scg_jit.stats import read_f1_tables
from scg_jit.stats import ttest_features
from scg_jit.stats import ttest_rows
from scg_jit.stats import write_stats_csv
from scg_jit.syntax import build_category_tree
from scg_jit.syntax import format_tree
from scg_jit.syntax import tokenize
from scg_jit.synth import generate

logger = logging.getLogger(__name__)

LOG_ENV_VAR = "SCG_LOG"

GRAPHS_FILE = "graphs.jsonl"
DATASET_FILE = "dataset.csv"
REPORT_FILE = "report.json"
F1_TABLE_FILE = "f1_table.csv"
MODELS_FILE = "models.json"
STATS_FILE = "stats.csv"
TTEST_FILE = "ttest.csv"

T = TypeVar("T")
R = TypeVar("R")


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def setup_logging() -> None:
    name = os.environ.get(LOG_ENV_VAR, "WARNING").strip().upper()
    level = logging.getLevelName(name)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if not isinstance(level, int):
        logger.warning(f"Unknown log level {name!r} in {LOG_ENV_VAR}, using WARNING")


def _fan_out(func: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    """Map `func` over `items` in order, on a process pool when `workers` > 1."""
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))
    return [func(item) for item in items]


def _existing(path: str | os.PathLike[str], what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} {p} does not exist")
    return p


#############################################################################
### SUBCOMMANDS
#############################################################################


def _extract_one(patch: CommitPatch) -> tuple[str, dict[str, SourceCodeGraph | None]]:
    return patch.commit_id, extract_commit(patch)


def _dump_trees(patch: CommitPatch, directory: Path) -> None:
    added, deleted = split_changes(patch)
    with atomic_write(directory / f"{patch.commit_id}.txt") as f:
        for side, fragments in zip(SIDES, (added, deleted)):
            for i, fragment in enumerate(fragments):
                f.write(f"# {side} fragment {i}\n")
                f.write(format_tree(build_category_tree(tokenize(fragment))))


def cmd_extract(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    patch_dir = _existing(args.patch_dir or cfg.paths.patch_dir.value, "Patch directory")
    out_dir = cfg.paths.out_dir.value
    patches = list(iter_patch_dir(patch_dir))

    graphs = _fan_out(_extract_one, patches, cfg.run.workers.value)
    records = (
        graph_to_record(commit_id, side, graph)
        for commit_id, sides in graphs
        for side in SIDES
        if (graph := sides[side]) is not None
    )
    prov = provenance(cfg.run.seed.value, sorted(patch_dir.glob("*.patch")))
    count = write_graphs_jsonl(prov, records, out_dir / GRAPHS_FILE)
    logger.debug(f"Wrote {count} graph(s) of {len(patches)} commit(s) to {out_dir / GRAPHS_FILE}")

    if args.dump_trees:
        for patch in patches:
            _dump_trees(patch, out_dir / "trees")


def _metrics_one(item: tuple[str, str, SourceCodeGraph]) -> tuple[str, str, MetricsResult]:
    commit_id, side, graph = item
    return commit_id, side, compute_metrics(graph)


def cmd_features(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    out_dir = cfg.paths.out_dir.value
    graphs_path = _existing(args.graphs or out_dir / GRAPHS_FILE, "Graph file")

    results = _fan_out(_metrics_one, read_graphs_jsonl(graphs_path), cfg.run.workers.value)
    rows: dict[str, list[tuple[str, GraphFeatureVector]]] = {side: [] for side in SIDES}
    for commit_id, side, result in results:
        if result.cycle_cap_hit:
            logger.warning(f"{commit_id} ({side}): cycle count capped at {result.vector.num_cycles}")
        rows[side].append((commit_id, result.vector))

    prov = provenance(cfg.run.seed.value, [graphs_path])
    for side in SIDES:
        path = out_dir / f"features_{side}.csv"
        count = write_feature_csv(prov, rows[side], path)
        logger.debug(f"Wrote {count} {side} feature row(s) to {path}")


def cmd_join(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    out_dir = cfg.paths.out_dir.value
    c_csv = _existing(args.c_features or cfg.paths.c_features.value, "Conventional feature file")
    a_csv = Path(args.a_features) if args.a_features else out_dir / "features_A.csv"
    d_csv = Path(args.d_features) if args.d_features else out_dir / "features_D.csv"
    sides = [p if p.exists() else None for p in (a_csv, d_csv)]
    for path, present in zip((a_csv, d_csv), sides):
        if present is None:
            logger.warning(f"{path} does not exist, joining all-zero features for that side")

    records = load_and_join(c_csv, *sides)
    inputs = [c_csv, *(p for p in sides if p is not None)]
    write_dataset_csv(provenance(cfg.run.seed.value, inputs), records, out_dir / DATASET_FILE)


def cmd_eval(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    out_dir = cfg.paths.out_dir.value
    dataset = _existing(args.dataset or out_dir / DATASET_FILE, "Dataset")
    configs = cfg.classifier_configs()

    report = run_matrix(
        read_dataset_csv(dataset),
        configs,
        cfg.classifiers.combinations.value,
        train_fraction=cfg.run.train_fraction.value,
        workers=cfg.run.workers.value,
        keep_models=args.dump_models,
    )
    prov = provenance(cfg.require_seed(), [dataset])
    write_report(prov, report, out_dir / REPORT_FILE)
    write_f1_table(prov, report, out_dir / F1_TABLE_FILE, cfg.run.dataset_name.value)
    if args.dump_models:
        write_models(prov, report, out_dir / MODELS_FILE)


def cmd_stats(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    out_dir = cfg.paths.out_dir.value
    if args.dataset:
        dataset = _existing(args.dataset, "Dataset")
        results = ttest_features(read_dataset_csv(dataset))
        if args.column:
            if args.column not in results:
                raise UsageError(f"Unknown feature column {args.column!r}")
            results = {args.column: results[args.column]}
        write_stats_csv(provenance(cfg.run.seed.value, [dataset]), ttest_rows(results), out_dir / TTEST_FILE)
        return

    if not args.tables:
        raise UsageError("stats needs F1 tables or --dataset")
    tables = [_existing(t, "F1 table") for t in args.tables]
    rows = compare_f1_tables(read_f1_tables(tables), alternative=Alternative.parse(args.alternative))
    write_stats_csv(provenance(cfg.run.seed.value, tables), rows, out_dir / STATS_FILE)


def cmd_embed(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    out_dir = cfg.paths.out_dir.value
    dataset = _existing(args.dataset or out_dir / DATASET_FILE, "Dataset")
    combinations = cfg.classifiers.combinations.value if args.combos else cfg.embed.combinations.value
    tsne = cfg.tsne_config()

    records = read_dataset_csv(dataset)
    scaled, _, _ = standardize(records, range(len(records)))
    prov = provenance(tsne.seed, [dataset])
    for combo in combinations:
        X, _ = select_combination(scaled, combo)
        embedding = tsne_embed(X, tsne)
        logger.debug(f"{combo}: final KL divergence {embedding.final_kl:.4f}")
        write_embedding_tsv(prov, records, embedding, out_dir / f"embedding_{combo}.tsv")


def cmd_synth(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    generate(cfg.synth_spec(), cfg.paths.out_dir.value)


def cmd_init_config(cfg: PipelineConfig, args: argparse.Namespace) -> None:
    if args.interactive:
        cfg.inquire()
    cfg.write()


COMMANDS: dict[str, Callable[[PipelineConfig, argparse.Namespace], None]] = {
    "extract": cmd_extract,
    "features": cmd_features,
    "join": cmd_join,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "embed": cmd_embed,
    "synth": cmd_synth,
    "init-config": cmd_init_config,
}


#############################################################################
### ARGUMENTS
#############################################################################


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"INI config file (default: {DEFAULT_CONFIG_FILE} if present)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--out-dir", help="directory for all artifacts")
    common.add_argument("--workers", type=int, help="worker processes")

    parser = ArgumentParser(prog="scg-jit", description="Source code graph features for buggy commit detection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("extract", parents=[common], help="patches -> graphs.jsonl")
    p.add_argument("patch_dir", nargs="?", help="directory of <commit_id>.patch files")
    p.add_argument("--dump-trees", action="store_true", help="also write the category trees to trees/")

    p = sub.add_parser("features", parents=[common], help="graphs.jsonl -> features_A.csv, features_D.csv")
    p.add_argument("graphs", nargs="?", help="graph file (default: <out-dir>/graphs.jsonl)")

    p = sub.add_parser("join", parents=[common], help="C, A and D features -> dataset.csv")
    p.add_argument("c_features", nargs="?", help="conventional feature CSV")
    p.add_argument("--a-features", help="added-side features (default: <out-dir>/features_A.csv)")
    p.add_argument("--d-features", help="deleted-side features (default: <out-dir>/features_D.csv)")

    p = sub.add_parser("eval", parents=[common], help="dataset.csv -> report.json, f1_table.csv")
    p.add_argument("dataset", nargs="?", help="dataset CSV (default: <out-dir>/dataset.csv)")
    p.add_argument("--train-fraction", type=float, help="share of the oldest commits used for training")
    p.add_argument("--classifiers", help="comma separated subset of lr,rf,knn")
    p.add_argument("--combos", help="comma separated subset of C,A,D,CA,CD,AD,CAD")
    p.add_argument("--dataset-name", help="value of the dataset column in f1_table.csv")
    p.add_argument("--dump-models", action="store_true", help="also write models.json")

    p = sub.add_parser("stats", parents=[common], help="F1 tables -> stats.csv, or dataset -> ttest.csv")
    p.add_argument("tables", nargs="*", help="f1_table.csv files of several datasets")
    p.add_argument("--alternative", default=Alternative.TWO_SIDED.value, choices=[a.value for a in Alternative])
    p.add_argument("--dataset", help="run per-feature t-tests on this dataset instead")
    p.add_argument("--column", help="restrict the t-test to one feature column")

    p = sub.add_parser("embed", parents=[common], help="dataset.csv -> embedding_<combo>.tsv")
    p.add_argument("dataset", nargs="?", help="dataset CSV (default: <out-dir>/dataset.csv)")
    p.add_argument("--perplexity", type=float, help="t-SNE perplexity")
    p.add_argument("--combos", help="comma separated feature combinations to embed")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic corpus")
    p.add_argument("--n", type=int, help="number of commits")

    p = sub.add_parser("init-config", help="write a commented default config file")
    p.add_argument("config", nargs="?", default=DEFAULT_CONFIG_FILE, help=f"target file (default: {DEFAULT_CONFIG_FILE})")
    p.add_argument("--interactive", action="store_true", help="ask for every value (needs the 'cli' extra)")
    return parser


def load_config(args: argparse.Namespace) -> PipelineConfig:
    if args.command == "init-config":
        return PipelineConfig(args.config).load(quiet=True)
    if args.config is not None:
        _existing(args.config, "Config file")
        return PipelineConfig(args.config).load().apply_overrides(args)
    # The default config file is optional
    return PipelineConfig(DEFAULT_CONFIG_FILE).load(quiet=True).apply_overrides(args)


def main(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args)
        COMMANDS[args.command](cfg, args)
    except UsageError as e:
        logger.error(str(e))
        return 1
    except (ScgError, OSError) as e:
        logger.error(str(e))
        return 2
    except SystemExit as e:
        # --help and --version
        return e.code if isinstance(e.code, int) else 0
    return 0
