from __future__ import annotations

import logging
import re
from collections.abc import Callable
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING
from typing import Any
from typing import Generic
from typing import TypeVar

from scg_jit.config.parser import PipelineConfigParser
from scg_jit.errors import UsageError

if TYPE_CHECKING:
    from scg_jit.config.configuration import Configuration

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _prompt(message: str, default: str, choices: Sequence[str] | None = None) -> str:
    """Ask for one value on the terminal; a choice list becomes a multi-select prompt."""
    try:
        from InquirerPy import inquirer
        from InquirerPy.base import Choice
    except ImportError as e:
        raise UsageError("Interactive configuration needs the 'cli' extra (pip install scg-jit[cli])") from e

    if choices is None:
        return str(inquirer.text(message=message, default=default, qmark="?", amark=">").execute())

    selected = set(PipelineConfigParser.split_to_list(default))
    result = inquirer.select(
        message=message,
        choices=[Choice(c, enabled=c in selected) for c in choices],
        multiselect=True,
        long_instruction="Use <tab> to de/select values and <enter> to confirm.",
        qmark="?",
        amark=">",
    ).execute()
    return PipelineConfigParser.list_to_str(result)


class ConfigEntryCollection:
    """
    Base class for grouping entries in an attribute of a Configuration.

    Every ConfigEntry attribute of a collection is picked up by the owning configuration.
    """


class ConfigEntry(Generic[T]):
    """
    A single typed option of a Configuration.

    The raw string lives in the configuration's parser; `value` converts it with
    `value_getter` after interpolation and falls back to the default when unset.
    """

    def __init__(
        self,
        section: str,
        option: str,
        default: T,
        message: str,
        value_getter: Callable[[str], T],
        value_setter: Callable[[T], str] = str,
        inquire: bool = True,
    ) -> None:
        self.section = self.escape_whitespace(section)
        self.option = self.escape_whitespace(option)
        self.value_getter = value_getter
        self.value_setter = value_setter
        self.default: str = value_setter(default)
        self.message = message
        self.do_inquire = inquire

        self.configuration: Configuration | None = None
        self.configparser: PipelineConfigParser | None = None

    @property
    def key(self) -> str:
        return f"{self.section}:{self.option}"

    def _parser(self) -> PipelineConfigParser:
        if self.configparser is None:
            raise ValueError(f"{self.key} is not attached to a configuration")
        return self.configparser

    @property
    def raw_value(self) -> str | None:
        return self._parser().get(self.section, self.option, raw=True, fallback=None)

    def get_value(self) -> T:
        text = self._parser().get(self.section, self.option, fallback=None)
        if text is None:
            text = self.default
        try:
            return self.value_getter(text)
        except (TypeError, ValueError) as e:
            raise UsageError(f"Invalid value {text!r} for {self.key}: {e}") from e

    def set_value(self, value: T | None) -> None:
        """Set the value; None removes the option so that the default applies again."""
        parser = self._parser()
        if value is None:
            if parser.has_option(self.section, self.option):
                parser.remove_option(self.section, self.option)
            return
        raw = self.value_setter(value)
        # Reject what could not be read back
        self.value_getter(raw)
        parser.set(self.section, self.option, raw, self.get_comment())

    @property
    def value(self) -> T:
        return self.get_value()

    @value.setter
    def value(self, value: T | None) -> None:
        self.set_value(value)

    def __repr__(self) -> str:
        shown = self.raw_value if self.configparser is not None else "n/a"
        return f"{self.key} = {shown}"

    @staticmethod
    def escape_whitespace(value: str) -> str:
        return re.sub(r"\s+", "_", value.strip())

    @staticmethod
    def get_msg(msg: str, strip: str = ":.", end: str = ":") -> str:
        return msg.strip().strip(strip) + end

    def get_comment(self) -> str:
        return self.message

    def choices(self) -> Sequence[str] | None:
        return None

    def inquire(self, use_existing_as_default: bool = True) -> None:
        """Ask for the value of this entry on the terminal."""
        if not self.do_inquire:
            return
        current = self.raw_value if use_existing_as_default else None
        while True:
            answer = _prompt(self.get_msg(self.message), current or self.default, self.choices())
            try:
                self.value_getter(answer)
            except (TypeError, ValueError, UsageError) as e:
                logger.warning(f"{self.key}: {e}")
                continue
            self._parser().set(self.section, self.option, answer, self.get_comment())
            return


class ChoiceListEntry(ConfigEntry[list[str]]):
    """A comma separated subset of a fixed vocabulary, kept in vocabulary order."""

    def __init__(
        self,
        section: str,
        option: str,
        default: Sequence[str],
        message: str,
        choices: Sequence[str],
        inquire: bool = True,
    ) -> None:
        self._choices = tuple(choices)
        super().__init__(
            section,
            option,
            list(default),
            message,
            value_getter=self._parse,
            value_setter=self._format,
            inquire=inquire,
        )

    def _parse(self, text: str) -> list[str]:
        lookup = {c.lower(): c for c in self._choices}
        values = PipelineConfigParser.split_to_list(text)
        unknown = [v for v in values if v.lower() not in lookup]
        if unknown:
            raise UsageError(f"{self.key}: unknown value(s) {', '.join(unknown)} (choose from {', '.join(self._choices)})")
        if not values:
            raise UsageError(f"{self.key}: at least one value is required")
        chosen = {lookup[v.lower()] for v in values}
        return [c for c in self._choices if c in chosen]

    def _format(self, values: Sequence[str] | str) -> str:
        return values if isinstance(values, str) else PipelineConfigParser.list_to_str(values)

    def choices(self) -> Sequence[str]:
        return self._choices

    def get_comment(self) -> str:
        return f"{self.message}\nChoices: {PipelineConfigParser.list_to_str(self._choices)}"


def _positive(convert: Callable[[str], Any]) -> Callable[[str], Any]:
    def check(text: str) -> Any:
        value = convert(text)
        if value <= 0:
            raise ValueError("must be positive")
        return value

    return check


class ConfigSection:
    """
    Factory for the entries of one section.

    Create entries with `section.IntOption(...)` and friends.
    """

    def __init__(self, name: str) -> None:
        self.name = name

    def Option(self, option: str, default: str, message: str, inquire: bool = True) -> ConfigEntry[str]:
        return ConfigEntry(self.name, option, default, message, value_getter=str, inquire=inquire)

    def IntOption(
        self, option: str, default: int, message: str, positive: bool = False, inquire: bool = True
    ) -> ConfigEntry[int]:
        getter = _positive(int) if positive else int
        return ConfigEntry(self.name, option, default, message, value_getter=getter, inquire=inquire)

    def FloatOption(
        self, option: str, default: float, message: str, positive: bool = False, inquire: bool = True
    ) -> ConfigEntry[float]:
        getter = _positive(float) if positive else float
        return ConfigEntry(self.name, option, default, message, value_getter=getter, value_setter=repr, inquire=inquire)

    def PathOption(self, option: str, default: str, message: str, inquire: bool = True) -> ConfigEntry[Path]:
        return ConfigEntry(
            self.name,
            option,
            Path(default),
            message,
            value_getter=lambda text: Path(text).expanduser(),
            value_setter=lambda p: str(p),
            inquire=inquire,
        )

    def ChoiceListOption(
        self, option: str, default: Sequence[str], message: str, choices: Sequence[str], inquire: bool = True
    ) -> ChoiceListEntry:
        return ChoiceListEntry(self.name, option, default, message, choices, inquire=inquire)
