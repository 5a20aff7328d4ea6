from __future__ import annotations

import enum
import logging
import os
import re
from collections.abc import Iterator
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from scg_jit.artifacts import read_table
from scg_jit.errors import DataError

logger = logging.getLogger(__name__)

HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
MODE_PREFIXES = ("old mode", "new mode", "rename from", "rename to", "copy from", "copy to")
BINARY_MARKERS = ("Binary files ", "GIT binary patch")
NO_NEWLINE_MARKER = "\\ No newline at end of file"


class LineKind(enum.Enum):
    ADDED = "Added"
    DELETED = "Deleted"
    CONTEXT = "Context"

    @classmethod
    def of(cls, line: str) -> LineKind:
        """Classify a hunk body line by its first character."""
        if line.startswith("+"):
            return cls.ADDED
        if line.startswith("-"):
            return cls.DELETED
        return cls.CONTEXT


@dataclass(frozen=True)
class Hunk:
    file_path: str
    lines: tuple[tuple[LineKind, str], ...]
    old_start: int = 0
    new_start: int = 0

    def count(self, kind: LineKind) -> int:
        return sum(1 for k, _ in self.lines if k is kind)


@dataclass(frozen=True)
class CommitPatch:
    commit_id: str
    author_timestamp: int
    hunks: tuple[Hunk, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.commit_id:
            raise DataError("commit_id must be non-empty")


def parse_patch(patch_text: str | bytes, commit_id: str, timestamp: int) -> CommitPatch:
    """Parse the unified diff of one commit into hunks of classified body lines.

    Parameters
    ----------
    patch_text : str | bytes
        Unified diff text. Bytes are decoded as UTF-8 with replacement characters.
    commit_id : str
        Identifier of the commit the patch belongs to.
    timestamp : int
        Author timestamp in seconds since epoch.

    Returns
    -------
    CommitPatch
        The hunks in file order. Header lines never appear in a hunk body.
    """
    if isinstance(patch_text, bytes):
        patch_text = patch_text.decode("utf-8", errors="replace")

    hunks: list[Hunk] = []
    file_path = ""
    skip_file = False
    current: list[tuple[LineKind, str]] | None = None
    starts = (0, 0)
    old_left = new_left = 0
    saw_marker = False

    def close() -> None:
        nonlocal current
        if current is not None and not skip_file:
            hunks.append(Hunk(file_path, tuple(current), *starts))
        current = None

    lines = patch_text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        i += 1

        if current is not None:
            if line.startswith(NO_NEWLINE_MARKER):
                continue
            if line[:1] in ("+", "-", " ", ""):
                kind = LineKind.of(line)
                current.append((kind, line[1:]))
                old_left -= kind is not LineKind.ADDED
                new_left -= kind is not LineKind.DELETED
                # the header counts bound the body; anything after it is not part of the hunk
                if old_left <= 0 and new_left <= 0:
                    close()
                continue
            logger.debug(f"{commit_id}: hunk in {file_path} ended before its header counts")
            close()

        if line.startswith("diff "):
            skip_file = False
            file_path = _strip_prefix(line.split()[-1]) if len(line.split()) > 1 else ""
            continue

        if line.startswith("--- ") and i < len(lines) and lines[i].startswith("+++ "):
            # File header pair, with or without a preceding `diff` line
            old_path, new_path = _header_path(line), _header_path(lines[i])
            file_path = new_path if new_path != "/dev/null" else old_path
            i += 1
            continue

        if (m := HUNK_HEADER.match(line)) is not None:
            saw_marker = True
            starts = (int(m.group(1)), int(m.group(3)))
            old_left = 1 if m.group(2) is None else int(m.group(2))
            new_left = 1 if m.group(4) is None else int(m.group(4))
            current = []
            if old_left <= 0 and new_left <= 0:
                close()
            continue

        if line.startswith(BINARY_MARKERS):
            logger.debug(f"{commit_id}: skipping binary diff of {file_path}")
            skip_file = True
        elif line.startswith(MODE_PREFIXES):
            logger.debug(f"{commit_id}: mode-only header for {file_path}")

    close()

    if not saw_marker and patch_text.strip():
        logger.warning(f"{commit_id}: no hunk markers found in patch")
    return CommitPatch(commit_id, int(timestamp), tuple(hunks))


def _strip_prefix(path: str) -> str:
    return path[2:] if path.startswith(("a/", "b/")) else path


def _header_path(line: str) -> str:
    return _strip_prefix(line[4:].split("\t")[0].strip())


def split_changes(patch: CommitPatch) -> tuple[list[str], list[str]]:
    """Split a commit into its added+context and deleted+context fragments.

    One fragment per hunk and side. A hunk without added lines contributes no added
    fragment, and a hunk without deleted lines contributes no deleted fragment.
    """
    added: list[str] = []
    deleted: list[str] = []
    for hunk in patch.hunks:
        if hunk.count(LineKind.ADDED):
            added.append("\n".join(t for k, t in hunk.lines if k is not LineKind.DELETED))
        if hunk.count(LineKind.DELETED):
            deleted.append("\n".join(t for k, t in hunk.lines if k is not LineKind.ADDED))
    return added, deleted


def read_commit_index(path: str | os.PathLike[str]) -> dict[str, int]:
    """Read the `commit_id,author_timestamp` sidecar into an ordered mapping."""
    frame = read_table(path, dtype={"commit_id": str})
    missing = {"commit_id", "author_timestamp"} - set(frame.columns)
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(sorted(missing))}")
    dupes = frame["commit_id"][frame["commit_id"].duplicated()]
    if len(dupes):
        raise DataError(f"{path}: duplicate commit_id {dupes.iloc[0]}")
    blank = frame["commit_id"][frame["author_timestamp"].isna()]
    if len(blank):
        raise DataError(f"{path}: missing author_timestamp for commit {blank.iloc[0]}")
    return {str(c): int(t) for c, t in zip(frame["commit_id"], frame["author_timestamp"])}


def iter_patch_dir(directory: str | os.PathLike[str]) -> Iterator[CommitPatch]:
    """Yield the parsed patches of a directory of `<commit_id>.patch` files.

    Commits listed in `commits.csv` come first, in index order; remaining patch files
    follow by name with timestamp 0.
    """
    directory = Path(directory)
    index_path = directory / "commits.csv"
    index = read_commit_index(index_path) if index_path.exists() else {}
    files = {p.stem: p for p in sorted(directory.glob("*.patch"))}

    ordered = [c for c in index if c in files] + [c for c in files if c not in index]
    for commit_id in ordered:
        if commit_id not in index:
            logger.warning(f"{commit_id}: not listed in commits.csv, using timestamp 0")
        yield parse_patch(files[commit_id].read_bytes(), commit_id, index.get(commit_id, 0))
