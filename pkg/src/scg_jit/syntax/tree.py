from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from dataclasses import field
from typing import Any

logger = logging.getLogger(__name__)

CATEGORY_VOCABULARY_VERSION = 1
CATEGORY_VOCABULARY: tuple[str, ...] = (
    "unit",
    "expr_stmt",
    "decl_stmt",
    "if",
    "else",
    "condition",
    "block",
    "for",
    "while",
    "do",
    "switch",
    "case",
    "return",
    "call",
    "argument_list",
    "argument",
    "parameter_list",
    "function",
    "type",
    "expr",
    "operator",
    "name",
    "literal",
    "modifier",
)
_VOCABULARY = frozenset(CATEGORY_VOCABULARY)

MAX_DEPTH = 64


@dataclass
class Node:
    """One syntactic-category node.

    `token` holds the source lexeme the node was created from (an identifier, an
    operator, or the keyword opening a construct); purely structural nodes carry None.
    """

    label: str
    children: list[Node] = field(default_factory=list)
    token: str | None = None

    def __post_init__(self) -> None:
        if self.label not in _VOCABULARY:
            raise ValueError(f"Unknown syntactic category {self.label!r}")

    def walk(self) -> Iterator[Node]:
        """Pre-order traversal, iterative so that deep trees never hit the recursion limit."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class CategoryTree:
    root: Node = field(default_factory=lambda: Node("unit"))

    def labels(self) -> set[str]:
        return {n.label for n in self.root.walk()}

    def token_nodes(self) -> list[Node]:
        """Nodes that stand for a source token, in source order."""
        return [n for n in self.root.walk() if n.token is not None]

    def depth(self) -> int:
        deepest = 0
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            deepest = max(deepest, d)
            stack.extend((c, d + 1) for c in node.children)
        return deepest

    def shape(self) -> tuple[str, tuple[Any, ...]]:
        """Nested (label, children) tuples, handy for structural comparisons."""

        def _shape(node: Node) -> tuple[str, tuple[Any, ...]]:
            return node.label, tuple(_shape(c) for c in node.children)

        return _shape(self.root)


def format_tree(tree: CategoryTree, indent: str = "  ") -> str:
    """Render a tree as indented text, one label per line (debug output)."""
    lines = []
    stack = [(tree.root, 0)]
    while stack:
        node, depth = stack.pop()
        lines.append(f"{indent * depth}{node.label}")
        stack.extend((c, depth + 1) for c in reversed(node.children))
    return "\n".join(lines) + "\n"
