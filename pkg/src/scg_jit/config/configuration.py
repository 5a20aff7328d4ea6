from __future__ import annotations

import logging
import os
from configparser import Interpolation
from typing import Any

from scg_jit.artifacts import atomic_write
from scg_jit.config.entries import ConfigEntry
from scg_jit.config.entries import ConfigEntryCollection
from scg_jit.config.parser import PipelineConfigParser
from scg_jit.config.parser import StrPath

logger = logging.getLogger(__name__)


class Configuration:
    """
    Super class for configurations backed by an INI file.

    Subclasses define their entries as attributes of type ConfigEntry or ConfigEntryCollection.
    Those entries are read from and written to the configuration file, and `inquire()` asks
    the user for each of them.
    """

    def __init__(self, path: StrPath | None, interpolation: Interpolation | None = None) -> None:
        """Create a new Configuration object.

        Parameters
        ----------
        path : str | PathLike | None
            File path to the configuration file. Without a path, `write` needs an explicit target.
        interpolation : Interpolation, optional
            Interpolation used when reading values, by default EnvInterpolation().
        """
        self.config_path: str | None = os.fspath(path) if path is not None else None
        self._entries: list[ConfigEntry[Any]] = []
        self._config_parser = PipelineConfigParser(interpolation=interpolation)
        self._update_entries()

    @staticmethod
    def get_config_entries_in_object(obj: object, ignore: tuple[str, ...] = ("entries",)) -> list[ConfigEntry[Any]]:
        """All ConfigEntries among the attributes of `obj`, descending into collections."""
        entries: list[ConfigEntry[Any]] = []
        for attr, member in vars(obj).items():
            if attr in ignore:
                continue
            if isinstance(member, ConfigEntry):
                entries.append(member)
            elif isinstance(member, ConfigEntryCollection):
                entries.extend(Configuration.get_config_entries_in_object(member))
        return entries

    @property
    def entries(self) -> list[ConfigEntry[Any]]:
        if not self._entries:
            self._entries = Configuration.get_config_entries_in_object(self)
        return self._entries

    def _update_entries(self) -> None:
        for entry in self.entries:
            entry.configparser = self._config_parser
            entry.configuration = self
            if self._config_parser.has_option(entry.section, entry.option) and not self._config_parser.get_comment(
                entry.section, entry.option
            ):
                self._config_parser.set_comment(entry.section, entry.option, entry.get_comment())

    def load(self, quiet: bool = False) -> Configuration:
        """Read the configuration file if it exists; a missing file keeps the defaults."""
        if self.config_path is not None:
            if not os.path.exists(self.config_path):
                if not quiet:
                    logger.warning(f"Configuration file {self.config_path} not found, using defaults")
            else:
                self._config_parser.read(self.config_path)
        self._update_entries()
        return self

    def write(self, save_path: StrPath | None = None) -> None:
        """Write every entry, with its raw value (or default) and its comment.

        Options of the file that are not entries of this configuration are kept.
        """
        if save_path is None:
            if self.config_path is None:
                raise ValueError("No save path provided and no default path set.")
            save_path = self.config_path

        parser = PipelineConfigParser()
        if os.path.exists(save_path):
            parser.read(save_path)
        for entry in self.entries:
            raw = entry.raw_value
            parser.set(entry.section, entry.option, entry.default if raw is None else raw, entry.get_comment())

        with atomic_write(save_path) as f:
            parser.write(f)
        logger.debug(f"Wrote configuration with {len(self.entries)} entries to {save_path}")

    def inquire(self, use_existing_values: bool = True) -> None:
        """Ask the user for the values of all entries."""
        logger.debug(f"Inquire configuration @ {self.config_path}")
        self.load(quiet=True)
        for entry in self.entries:
            entry.inquire(use_existing_values)
        logger.debug(f"Configuration of {self.config_path} completed.")
