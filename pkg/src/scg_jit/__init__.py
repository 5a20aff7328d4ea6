from __future__ import annotations

__version__ = "0.1.0"

from scg_jit.patch import parse_patch
from scg_jit.patch import split_changes
from scg_jit.scg import SourceCodeGraph

__all__ = ["SourceCodeGraph", "__version__", "parse_patch", "split_changes"]
