from __future__ import annotations

import json
import logging
import os
from collections import Counter
from collections.abc import Iterable
from collections.abc import Iterator
from dataclasses import dataclass
from dataclasses import field
from typing import Any

import networkx as nx

from scg_jit.artifacts import atomic_write
from scg_jit.errors import DataError
from scg_jit.patch import CommitPatch
from scg_jit.patch import split_changes
from scg_jit.syntax import CategoryTree
from scg_jit.syntax import build_category_tree
from scg_jit.syntax import tokenize

logger = logging.getLogger(__name__)

SIDES = ("A", "D")

Edge = tuple[str, str]


@dataclass(frozen=True)
class SourceCodeGraph:
    """Directed multigraph over syntactic-category labels.

    Edge multiplicities are kept in a Counter; a label appears in `nodes` as soon as
    any tree node carries it, even when it has no incident edge.
    """

    nodes: frozenset[str] = field(default_factory=frozenset)
    edges: Counter[Edge] = field(default_factory=Counter)

    def __post_init__(self) -> None:
        for (src, dst), mult in self.edges.items():
            if src not in self.nodes or dst not in self.nodes:
                raise DataError(f"Edge {src}->{dst} has an endpoint outside the node set")
            if mult <= 0:
                raise DataError(f"Edge {src}->{dst} has non-positive multiplicity {mult}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SourceCodeGraph):
            return NotImplemented
        return self.nodes == other.nodes and dict(self.edges) == dict(other.edges)

    def __hash__(self) -> int:
        return hash((self.nodes, frozenset(self.edges.items())))

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(sorted(self.nodes))
        for (src, dst), mult in sorted(self.edges.items()):
            g.add_edges_from([(src, dst)] * mult)
        return g

    def simple_digraph(self) -> nx.DiGraph:
        """Projection without multiplicities and without self-loops."""
        g = nx.DiGraph()
        g.add_nodes_from(sorted(self.nodes))
        g.add_edges_from(sorted(e for e in self.edges if e[0] != e[1]))
        return g


def tree_to_graph(tree: CategoryTree) -> SourceCodeGraph:
    """Build the graph of one tree: parent->child edges plus edges between adjacent siblings."""
    edges: Counter[Edge] = Counter()
    for node in tree.root.walk():
        children = node.children
        for child in children:
            edges[node.label, child.label] += 1
        for left, right in zip(children, children[1:]):
            edges[left.label, right.label] += 1
    return SourceCodeGraph(frozenset(tree.labels()), edges)


def union_graphs(graphs: Iterable[SourceCodeGraph]) -> SourceCodeGraph:
    nodes: set[str] = set()
    edges: Counter[Edge] = Counter()
    for g in graphs:
        nodes |= g.nodes
        edges.update(g.edges)
    return SourceCodeGraph(frozenset(nodes), edges)


def build_side_graph(fragments: Iterable[str]) -> SourceCodeGraph:
    """Union of the graphs of all fragments belonging to one commit side."""
    return union_graphs(tree_to_graph(build_category_tree(tokenize(f))) for f in fragments)


def extract_commit(patch: CommitPatch) -> dict[str, SourceCodeGraph | None]:
    """Graphs of the added (A) and deleted (D) side of a commit.

    A side without any changed line maps to None rather than to an empty graph, so that
    downstream writers can omit the row.
    """
    added, deleted = split_changes(patch)
    logger.debug(f"{patch.commit_id}: {len(added)} added and {len(deleted)} deleted fragment(s)")
    return {
        "A": build_side_graph(added) if added else None,
        "D": build_side_graph(deleted) if deleted else None,
    }


#############################################################################
### JSON-LINES RECORDS
#############################################################################


def graph_to_record(commit_id: str, side: str, graph: SourceCodeGraph) -> dict[str, Any]:
    return {
        "commit_id": commit_id,
        "side": side,
        "nodes": sorted(graph.nodes),
        "edges": [[src, dst, mult] for (src, dst), mult in sorted(graph.edges.items())],
    }


def record_to_graph(record: dict[str, Any]) -> tuple[str, str, SourceCodeGraph]:
    try:
        commit_id = str(record["commit_id"])
        side = str(record["side"])
        nodes = frozenset(str(n) for n in record["nodes"])
        edges: Counter[Edge] = Counter({(str(s), str(d)): int(m) for s, d, m in record["edges"]})
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"Malformed graph record: {e}") from e
    if side not in SIDES:
        raise DataError(f"{commit_id}: unknown side {side!r}")
    return commit_id, side, SourceCodeGraph(nodes, edges)


def dump_record(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_graphs_jsonl(
    prov: dict[str, Any],
    records: Iterable[dict[str, Any]],
    path: str | os.PathLike[str],
) -> int:
    """Write the provenance record followed by one graph record per line; returns the record count."""
    count = 0
    with atomic_write(path) as f:
        f.write(dump_record({"provenance": prov}) + "\n")
        for record in records:
            f.write(dump_record(record) + "\n")
            count += 1
    return count


def read_graphs_jsonl(path: str | os.PathLike[str]) -> Iterator[tuple[str, str, SourceCodeGraph]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: invalid JSON: {e.msg}") from e
            if "provenance" in record:
                continue
            yield record_to_graph(record)
