from __future__ import annotations

import configparser
import os
import re
from typing import Any

_ENV_VAR = re.compile(r"\$(\w+|\{\w+\})")


class EnvInterpolation(configparser.ExtendedInterpolation):
    """`${section:option}` references plus environment variables.

    `$VAR` and `${VAR}` are expanded from the environment before the usual
    ExtendedInterpolation pass; unknown variables are left for that pass, so a missing
    reference still raises. Raw values (as written back to disk) are never expanded.
    """

    def before_get(self, parser: Any, section: str, option: str, value: str, defaults: Any) -> str:
        return super().before_get(parser, section, option, os.path.expandvars(value), defaults)

    def before_set(self, parser: Any, section: str, option: str, value: str) -> str:
        # Environment references are valid syntax here, unlike in ExtendedInterpolation
        super().before_set(parser, section, option, _ENV_VAR.sub("", value.replace("$$", "")))
        return value
