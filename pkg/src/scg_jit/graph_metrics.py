from __future__ import annotations

import dataclasses
import itertools
import logging
import os
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any

import networkx as nx
import numpy as np
import pandas as pd

from scg_jit.artifacts import atomic_write
from scg_jit.artifacts import provenance_comment
from scg_jit.scg import SourceCodeGraph

logger = logging.getLogger(__name__)

CYCLE_CAP = 100_000

# Column order of the feature CSVs (f1..f12)
FEATURE_NAMES: tuple[str, ...] = (
    "num_cycles",
    "density",
    "num_nodes",
    "num_edges",
    "avg_in_degree",
    "avg_out_degree",
    "max_degree",
    "min_degree",
    "sum_degree",
    "avg_degree",
    "median_degree",
    "num_self_loops",
)


@dataclass(frozen=True)
class GraphFeatureVector:
    num_cycles: int = 0
    density: float = 0.0
    num_nodes: int = 0
    num_edges: int = 0
    avg_in_degree: float = 0.0
    avg_out_degree: float = 0.0
    max_degree: int = 0
    min_degree: int = 0
    sum_degree: int = 0
    avg_degree: float = 0.0
    median_degree: float = 0.0
    num_self_loops: int = 0

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class MetricsResult:
    vector: GraphFeatureVector
    cycle_cap_hit: bool = False


def count_simple_cycles(g: SourceCodeGraph, cap: int = CYCLE_CAP) -> tuple[int, bool]:
    """Count simple directed cycles of length >= 2, stopping at `cap`.

    Returns the count and whether the cap was reached.
    """
    cycles = nx.simple_cycles(g.simple_digraph())
    count = sum(1 for _ in itertools.islice(cycles, cap))
    return count, count >= cap


def compute_metrics(g: SourceCodeGraph) -> MetricsResult:
    """Compute the twelve graph attributes of one graph.

    Degrees are multiplicity weighted and a self-loop contributes two to the degree of its
    node, so that the degree sum is always twice the edge count.
    """
    n = len(g.nodes)
    if n == 0:
        return MetricsResult(GraphFeatureVector())

    in_deg: Counter[str] = Counter()
    out_deg: Counter[str] = Counter()
    for (src, dst), mult in g.edges.items():
        out_deg[src] += mult
        in_deg[dst] += mult
    degrees = np.array(sorted(in_deg[v] + out_deg[v] for v in g.nodes), dtype=np.int64)

    num_edges = sum(g.edges.values())
    simple_edges = sum(1 for src, dst in g.edges if src != dst)
    num_cycles, cap_hit = count_simple_cycles(g)

    vector = GraphFeatureVector(
        num_cycles=num_cycles,
        density=simple_edges / (n * (n - 1)) if n > 1 else 0.0,
        num_nodes=n,
        num_edges=num_edges,
        avg_in_degree=num_edges / n,
        avg_out_degree=num_edges / n,
        max_degree=int(degrees[-1]),
        min_degree=int(degrees[0]),
        sum_degree=int(degrees.sum()),
        avg_degree=float(degrees.mean()),
        median_degree=float(np.median(degrees)),
        num_self_loops=sum(mult for (src, dst), mult in g.edges.items() if src == dst),
    )
    return MetricsResult(vector, cap_hit)


def feature_frame(rows: Iterable[tuple[str, GraphFeatureVector]]) -> pd.DataFrame:
    """Frame with columns `commit_id, f1..f12`."""
    columns = ["commit_id"] + [f"f{i}" for i in range(1, len(FEATURE_NAMES) + 1)]
    return pd.DataFrame([(cid, *vec.as_tuple()) for cid, vec in rows], columns=columns)


def write_feature_csv(
    prov: dict[str, Any],
    rows: Iterable[tuple[str, GraphFeatureVector]],
    path: str | os.PathLike[str],
) -> int:
    frame = feature_frame(rows)
    with atomic_write(path) as f:
        f.write(provenance_comment(prov))
        frame.to_csv(f, index=False, lineterminator="\n", float_format="%.10g")
    return len(frame)
