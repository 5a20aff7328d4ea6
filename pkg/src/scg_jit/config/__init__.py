from scg_jit.config.configuration import Configuration
from scg_jit.config.entries import ChoiceListEntry
from scg_jit.config.entries import ConfigEntry
from scg_jit.config.entries import ConfigEntryCollection
from scg_jit.config.entries import ConfigSection
from scg_jit.config.interpolation import EnvInterpolation
from scg_jit.config.matcher import CommentMatcher
from scg_jit.config.parser import PipelineConfigParser
from scg_jit.config.pipeline import DEFAULT_CONFIG_FILE
from scg_jit.config.pipeline import PipelineConfig

__all__ = [
    "ChoiceListEntry",
    "CommentMatcher",
    "ConfigEntry",
    "ConfigEntryCollection",
    "ConfigSection",
    "Configuration",
    "DEFAULT_CONFIG_FILE",
    "EnvInterpolation",
    "PipelineConfig",
    "PipelineConfigParser",
]
