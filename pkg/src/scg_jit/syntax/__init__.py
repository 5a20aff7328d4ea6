from __future__ import annotations

from scg_jit.syntax.tagger import build_category_tree
from scg_jit.syntax.tokens import Token
from scg_jit.syntax.tokens import TokenClass
from scg_jit.syntax.tokens import tokenize
from scg_jit.syntax.tree import CATEGORY_VOCABULARY
from scg_jit.syntax.tree import CATEGORY_VOCABULARY_VERSION
from scg_jit.syntax.tree import MAX_DEPTH
from scg_jit.syntax.tree import CategoryTree
from scg_jit.syntax.tree import Node
from scg_jit.syntax.tree import format_tree

__all__ = [
    "CATEGORY_VOCABULARY",
    "CATEGORY_VOCABULARY_VERSION",
    "MAX_DEPTH",
    "CategoryTree",
    "Node",
    "Token",
    "TokenClass",
    "build_category_tree",
    "format_tree",
    "tokenize",
]
