from __future__ import annotations

import configparser
import io
import logging
import os
from collections.abc import Iterable
from collections.abc import Sequence
from typing import IO
from typing import Any

from scg_jit.config.interpolation import EnvInterpolation
from scg_jit.config.matcher import CommentMatcher

logger = logging.getLogger(__name__)

StrPath = str | os.PathLike[str]


class PipelineConfigParser(configparser.ConfigParser):
    """
    ConfigParser that keeps the comments of the files it reads and writes them back.

    Comments are attached to the option or section that follows them; the first
    comment block of a file and a trailing block after the last option are kept as
    `top_comment` and `end_comment`.
    """

    def __init__(
        self,
        *,
        delimiters: Sequence[str] = ("=", ":"),
        comment_prefixes: Sequence[str] = ("#", ";"),
        interpolation: configparser.Interpolation | None = None,
        ignore_missing_files: bool = True,
    ) -> None:
        super().__init__(
            delimiters=tuple(delimiters),
            comment_prefixes=tuple(comment_prefixes),
            interpolation=interpolation if interpolation is not None else EnvInterpolation(),
        )
        self.top_comment: str | None = None
        self.end_comment: str | None = None
        self._option_comments: dict[str, dict[str, str]] = {}
        self._section_comments: dict[str, str] = {}
        self._delimiters = tuple(delimiters)
        self._comment_prefixes = tuple(comment_prefixes)
        self._ignore_missing_files = ignore_missing_files

    #############################################################################
    ### READING AND WRITING
    #############################################################################

    def read(self, filenames: StrPath | Iterable[StrPath], encoding: str | None = None) -> list[str]:
        """Read every existing file of `filenames`; returns the ones read successfully."""
        if isinstance(filenames, (str, os.PathLike)):
            filenames = [filenames]
        paths_ok = []
        for filename in filenames:
            if not os.path.isfile(filename):
                if not self._ignore_missing_files:
                    logger.warning(f"Configuration file {filename} does not exist")
                continue
            try:
                with open(filename, encoding=encoding or "utf-8") as f:
                    self.read_file(f, os.fspath(filename))
            except OSError as e:
                logger.warning(f"Cannot read configuration file {filename}: {e}")
                continue
            paths_ok.append(os.fspath(filename))
        return paths_ok

    def read_file(self, f: Iterable[str], source: str | None = None) -> None:
        lines = list(f)
        super().read_file(lines, source)
        self._parse_comments(lines)

    def write(self, fp: IO[str], space_around_delimiters: bool = True) -> None:  # type: ignore[override]
        delimiter = f" {self._delimiters[0]} " if space_around_delimiters else self._delimiters[0]
        prefix = self._comment_prefixes[0]

        if self.top_comment:
            fp.write(CommentMatcher.add_prefix(self.top_comment, prefix) + "\n\n")
        if self._defaults:
            self._write_commented_section(fp, self.default_section, self._defaults, delimiter)
        for section in self._sections:
            self._write_commented_section(fp, section, self._sections[section], delimiter)
        if self.end_comment:
            fp.write(CommentMatcher.add_prefix(self.end_comment, prefix) + "\n")

    def _write_commented_section(self, fp: IO[str], section: str, items: Any, delimiter: str) -> None:
        prefix = self._comment_prefixes[0]
        if comment := self._section_comments.get(section):
            fp.write(CommentMatcher.add_prefix(comment, prefix) + "\n")
        fp.write(f"[{section}]\n")
        for key, value in items.items():
            value = self._interpolation.before_write(self, section, key, value)
            if value is not None or not self._allow_no_value:
                value = delimiter + str(value).replace("\n", "\n\t")
            else:
                value = ""
            if comment := self._option_comments.get(section, {}).get(key):
                fp.write(CommentMatcher.add_prefix(comment, prefix) + "\n")
            fp.write(f"{key}{value}\n")
        fp.write("\n")

    def _parse_comments(self, text: str | Iterable[str]) -> None:
        matcher = CommentMatcher(self._delimiters, self._comment_prefixes)
        for m in matcher.iter_comments(text):
            if m.section is None and m.option is None:
                if self.top_comment is None:
                    self.top_comment = m.comment
                else:
                    self.end_comment = m.comment
            else:
                self.set_comment(m.section, m.option, m.comment)

    def __str__(self) -> str:
        s = io.StringIO()
        self.write(s)
        return s.getvalue()

    #############################################################################
    ### COMMENTS
    #############################################################################

    def get_comment(self, section: str, option: str | None = None) -> str | None:
        """Comment of a section (`option` None) or of an option; None if there is none."""
        if option is None:
            return self._section_comments.get(section)
        return self._option_comments.get(section, {}).get(self.optionxform(option))

    def set_comment(self, section: str | None, option: str | None = None, comment: str | None = None) -> None:
        if section is None:
            return
        if option is None:
            if comment:
                self._section_comments[section] = comment
            else:
                self._section_comments.pop(section, None)
            return
        options = self._option_comments.setdefault(section, {})
        if comment:
            options[self.optionxform(option)] = comment
        else:
            options.pop(self.optionxform(option), None)

    def set(
        self, section: str, option: str, value: str | None = None, comment: str | None = None
    ) -> None:
        """Set an option, creating its section when needed, and optionally its comment."""
        if not self.has_section(section):
            self.add_section(section)
        super().set(section, option, value)
        if comment:
            self.set_comment(section, option, comment)

    def add_section(self, section: str, comment: str | None = None) -> None:
        super().add_section(section)
        if comment:
            self.set_comment(section, comment=comment)

    #############################################################################
    ### LISTS
    #############################################################################

    @staticmethod
    def split_to_list(value: str | None, delimiter: str = ",") -> list[str]:
        if not value:
            return []
        return [item.strip() for item in value.strip("[]").split(delimiter) if item.strip()]

    @staticmethod
    def list_to_str(values: Sequence[str] | str, delimiter: str = ", ") -> str:
        return values if isinstance(values, str) else delimiter.join(values)
