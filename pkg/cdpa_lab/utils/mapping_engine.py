"""
Maps flat `section.field = value` experiment files onto ExperimentConfig.

List-valued fields accept comma lists (`10, 20, 30`) or inclusive ranges
written `start:step:stop`. Scalars are handed to pydantic as text and coerced
by the field types. All problems of one file are collected and reported
together.
"""
import logging
import math
import typing
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Union

from pydantic import BaseModel, ValidationError

from ..exceptions import CdpaError, ConfigError
from ..models import ExperimentConfig
from .validators import ConfigKeyValidator, ValidationResult

logger = logging.getLogger(__name__)


class TransformationType(Enum):
    SCALAR = "scalar"
    INTEGER_LIST = "integer_list"
    FLOAT_LIST = "float_list"


class MappingError(CdpaError):
    """A configuration value could not be converted"""
    pass


def _section_models() -> Dict[str, typing.Type[BaseModel]]:
    return {name: field.annotation for name, field in ExperimentConfig.model_fields.items()}


def _field_kind(annotation: Any) -> TransformationType:
    if typing.get_origin(annotation) in (list, List):
        (item,) = typing.get_args(annotation) or (float,)
        return TransformationType.INTEGER_LIST if item is int else TransformationType.FLOAT_LIST
    return TransformationType.SCALAR


class ConfigMappingEngine:
    """Parser from flat experiment text to a validated ExperimentConfig"""

    def __init__(self):
        self.sections = _section_models()
        self.field_kinds: Dict[str, Dict[str, TransformationType]] = {
            section: {name: _field_kind(field.annotation) for name, field in model.model_fields.items()}
            for section, model in self.sections.items()
        }
        self.key_validator = ConfigKeyValidator({s: kinds.keys() for s, kinds in self.field_kinds.items()})
        self.transformations: Dict[TransformationType, Callable[[str], Any]] = {
            TransformationType.SCALAR: self._to_scalar,
            TransformationType.INTEGER_LIST: lambda text: self._to_list(text, int),
            TransformationType.FLOAT_LIST: lambda text: self._to_list(text, float),
        }

    def _to_scalar(self, text: str) -> str:
        if text == "":
            raise MappingError("Empty value")
        return text

    def _to_number(self, text: str, cast: Callable[[str], Union[int, float]]) -> Union[int, float]:
        try:
            value = cast(text.strip())
        except ValueError:
            raise MappingError(f"Not a valid {cast.__name__}: {text.strip()!r}")
        if isinstance(value, float) and not math.isfinite(value):
            raise MappingError(f"Value must be finite: {text.strip()!r}")
        return value

    def _to_list(self, text: str, cast: Callable[[str], Union[int, float]]) -> List[Union[int, float]]:
        if text == "":
            raise MappingError("Empty list")
        if ":" in text:
            return self._expand_range(text, cast)
        return [self._to_number(part, cast) for part in text.split(",")]

    def _expand_range(self, text: str, cast: Callable[[str], Union[int, float]]) -> List[Union[int, float]]:
        """Inclusive `start:step:stop` range"""
        parts = text.split(":")
        if len(parts) != 3:
            raise MappingError(f"Range must be start:step:stop, got {text!r}")
        start, step, stop = (self._to_number(p, cast) for p in parts)
        if step == 0:
            raise MappingError("Range step must be nonzero")
        if (stop - start) * step < 0:
            raise MappingError(f"Range step {step} never reaches {stop} from {start}")

        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [cast(start + i * step) for i in range(count)]

    def parse_text(self, text: str, source: str = "<text>") -> ExperimentConfig:
        """
        Parse and validate experiment text.

        Raises:
            ConfigError: listing every malformed line, unknown or duplicate key,
                unparseable value and violated field constraint
        """
        result = ValidationResult()
        nested: Dict[str, Dict[str, Any]] = {}
        seen: Dict[str, int] = {}

        for line_no, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                result.add_error("syntax", "Expected `key = value`", raw_line.strip(), "line_format", line_no)
                continue

            key, value = (part.strip() for part in line.split("=", 1))
            if not self.key_validator.validate_key(key, result, line_no):
                continue
            if key in seen:
                result.add_error(key, f"Duplicate key (first set on line {seen[key]})", value, "duplicate", line_no)
                continue
            seen[key] = line_no

            section, field = key.split(".", 1)
            try:
                converted = self.transformations[self.field_kinds[section][field]](value)
            except MappingError as e:
                result.add_error(key, str(e), value, "value_format", line_no)
                continue
            nested.setdefault(section, {})[field] = converted

        config = None
        if result.is_valid:
            try:
                config = ExperimentConfig.model_validate(nested)
            except ValidationError as e:
                result.add_pydantic_errors(e)

        if not result.is_valid:
            logger.error(f"❌ Invalid configuration {source}:\n{result.describe()}")
            raise ConfigError(f"Invalid configuration {source}:\n{result.describe()}", result.errors)

        logger.debug(f"Parsed {len(seen)} configuration keys from {source}")
        return config

    def load(self, path: Union[str, Path]) -> ExperimentConfig:
        """Read and parse an experiment file"""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(f"Cannot read configuration {path}: {e}") from e
        return self.parse_text(text, source=str(path))


config_mapping_engine = ConfigMappingEngine()


def load_config(path: Union[str, Path, None]) -> ExperimentConfig:
    """Experiment configuration from a file, or all defaults when path is None"""
    if path is None:
        return ExperimentConfig()
    return config_mapping_engine.load(path)
