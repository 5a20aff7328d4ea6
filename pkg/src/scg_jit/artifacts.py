from __future__ import annotations

import contextlib
import hashlib
import io
import json
import logging
import os
from collections.abc import Iterable
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import pandas as pd

from scg_jit.errors import DataError

logger = logging.getLogger(__name__)

TOOL_NAME = "scg-jit"


@contextlib.contextmanager
def atomic_write(path: str | os.PathLike[str], newline: str = "\n") -> Iterator[io.TextIOWrapper]:
    """Open `path` for writing through a temporary sibling file.

    The temporary file is renamed onto `path` only when the block exits cleanly,
    so readers never observe a partially written artifact.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(f"{target.name}.tmp-{os.getpid()}")
    try:
        with open(tmp, "w", encoding="utf-8", newline=newline) as f:
            yield f
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            tmp.unlink()
        raise


def file_digest(paths: Iterable[str | os.PathLike[str]]) -> str:
    """Digest over the sorted (file name, content) pairs of the given files."""
    h = hashlib.sha256()
    for p in sorted(Path(p) for p in paths):
        h.update(p.name.encode("utf-8"))
        h.update(b"\0")
        h.update(p.read_bytes())
        h.update(b"\0")
    return "sha256:" + h.hexdigest()


def read_table(path: str | os.PathLike[str], **kwargs: Any) -> pd.DataFrame:
    """`pd.read_csv` with `#` comment lines skipped and unreadable files raised as DataError."""
    try:
        return pd.read_csv(path, comment="#", **kwargs)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: not a readable CSV table: {e}") from e


def provenance(seed: int | None, inputs: Iterable[str | os.PathLike[str]] = ()) -> dict[str, Any]:
    """Provenance record embedded into every artifact.

    Contains no wall-clock time so that repeated runs stay byte-identical.
    """
    from scg_jit import __version__

    files = [Path(p) for p in inputs]
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "seed": seed,
        "inputs": {p.name: file_digest([p]) for p in sorted(files)},
    }


def provenance_comment(prov: dict[str, Any]) -> str:
    """Single `#` comment line carrying the provenance record, for CSV/TSV headers."""
    return "# " + json.dumps(prov, sort_keys=True, separators=(",", ":")) + "\n"


def dump_json(prov: dict[str, Any], payload: dict[str, Any], path: str | os.PathLike[str]) -> None:
    with atomic_write(path) as f:
        json.dump({"provenance": prov, **payload}, f, indent=2, sort_keys=True)
        f.write("\n")
