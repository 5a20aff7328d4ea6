from __future__ import annotations

import logging
import re
from collections.abc import Iterable
from collections.abc import Iterator
from collections.abc import Sequence
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CommentMatch:
    """A comment block and the section/option it precedes.

    Both `section` and `option` are None for the leading and trailing comment of a file;
    only `option` is None for a section comment.
    """

    comment: str
    section: str | None
    option: str | None


class CommentMatcher:
    """Recovers comments from INI text, which `configparser` discards on reading."""

    def __init__(self, delimiters: Sequence[str], comment_prefixes: Sequence[str]) -> None:
        self.delimiters = tuple(delimiters)
        self.comment_prefixes = tuple(comment_prefixes)

        delims = "|".join(re.escape(d) for d in self.delimiters)
        prefixes = "".join(re.escape(p) for p in self.comment_prefixes)
        self._comment = re.compile(rf"^\s*[{prefixes}]")
        self._section = re.compile(r"^\s*\[([^\]]+)\]\s*$")
        self._option = re.compile(rf"^\s*(\b.+?\b)\s*?(?:{delims})")

    def iter_comments(self, text: str | Iterable[str]) -> Iterator[CommentMatch]:
        lines = text.splitlines() if isinstance(text, str) else text
        header_done = False
        section: str | None = None
        block: list[str] = []

        for raw in lines:
            line = raw.rstrip("\n")
            if not line.strip():
                # The first blank-line separated block before any content is the file comment
                if block and not header_done:
                    header_done = True
                    yield self._match(block, None, None)
                block = []
                continue
            if self._comment.match(line):
                block.append(line.strip())
                continue

            header_done = True
            if (m := self._section.match(line)) is not None:
                section = m.group(1).strip()
                if block:
                    yield self._match(block, section, None)
            elif (m := self._option.match(line)) is not None:
                if block:
                    yield self._match(block, section, m.group(1).strip())
            block = []

        if block:
            yield self._match(block, None, None)

    def _match(self, block: list[str], section: str | None, option: str | None) -> CommentMatch:
        return CommentMatch(self.strip_prefix("\n".join(block)), section, option)

    def strip_prefix(self, text: str) -> str:
        out = []
        for line in text.split("\n"):
            for prefix in self.comment_prefixes:
                if line.startswith(prefix):
                    line = line[len(prefix) :].strip()
                    break
            out.append(line)
        return "\n".join(out)

    @staticmethod
    def add_prefix(text: str, prefix: str) -> str:
        """Prefix every line of `text` with `prefix` and one space."""
        lead = prefix.strip() + " "
        return "\n".join(line if line.startswith(lead) else (lead + line).rstrip() for line in text.split("\n"))
