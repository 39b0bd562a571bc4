"""
Parsers for the text formats the simulator reads.

Both formats are YAML documents validated into pydantic models:
instance files (one cost function) and experiment configs (instance,
schedule, engines, thresholds). See docs/instance-format.md and
docs/config-format.md.
"""

from pathlib import Path
from typing import Any, List, Protocol, TypeVar

import yaml
from pydantic import ValidationError

T_co = TypeVar("T_co", covariant=True)


class ConfigError(ValueError):
    """A config or instance file cannot be read or does not validate."""

    def __init__(self, source: Path | str, problem: str):
        self.source = str(source)
        self.problem = problem
        super().__init__(f"{source}: {problem}")


class Parser(Protocol[T_co]):
    """Protocol for all file parsers."""

    def parse(self, source: Path) -> T_co:
        """Parse the source into our internal model."""
        ...

    def validate(self, spec: Any) -> List[str]:
        """Return the semantic problems of a parsed model (empty when valid)."""
        ...


def load_yaml_mapping(source: Path) -> dict:
    """Read a YAML file whose top level must be a mapping."""
    try:
        text = Path(source).read_text()
    except OSError as e:
        raise ConfigError(source, f"cannot read file ({e.strerror or e})") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(source, f"invalid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(source, "top level must be a mapping of keys to values")
    return data


def describe_validation_error(error: ValidationError) -> str:
    """One line per failing field, dotted location first."""
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


from parsers.instance import InstanceParser, InstanceSpec, load_instance  # noqa: E402
from parsers.experiment import (  # noqa: E402
    AcceptanceThresholds,
    Engine,
    ExperimentConfig,
    ExperimentConfigParser,
)

__all__ = [
    "AcceptanceThresholds",
    "ConfigError",
    "Engine",
    "ExperimentConfig",
    "ExperimentConfigParser",
    "InstanceParser",
    "InstanceSpec",
    "Parser",
    "describe_validation_error",
    "load_instance",
    "load_yaml_mapping",
]
