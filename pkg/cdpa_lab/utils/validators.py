import re
import logging
from typing import Dict, Any, List, Optional, Callable, Iterable

from pydantic import ValidationError

logger = logging.getLogger(__name__)

KEY_PATTERN = re.compile(r"^[a-z][a-z0-9_]*\.[a-z][a-z0-9_]*$")


class ValidationResult:
    """Structured validation result"""

    def __init__(self):
        self.is_valid = True
        self.errors: List[Dict[str, Any]] = []

    def add_error(self, field: str, message: str, value: Any = None, rule: str = None, line: int = None):
        """Add validation error"""
        self.is_valid = False
        self.errors.append({
            "field": field,
            "message": message,
            "value": value,
            "rule": rule,
            "line": line,
        })

    def add_pydantic_errors(self, exc: ValidationError, prefix: str = ""):
        """Translate a pydantic ValidationError into field errors"""
        for err in exc.errors():
            location = ".".join(str(part) for part in err.get("loc", ()))
            field = ".".join(p for p in (prefix, location) if p) or "config"
            self.add_error(field, err.get("msg", "invalid value"), err.get("input"), rule=err.get("type"))

    def describe(self) -> str:
        """One line per error, prefixed with its line number when known"""
        lines = []
        for err in self.errors:
            where = f"line {err['line']}: " if err.get("line") else ""
            lines.append(f"{where}{err['field']}: {err['message']}")
        return "\n".join(lines)


class ValidationRule:
    """Individual validation rule"""

    def __init__(self, name: str, validator: Callable[[Any], bool], message: str):
        self.name = name
        self.validator = validator
        self.message = message

    def check(self, value: Any, field: str, result: ValidationResult, line: int = None) -> bool:
        """Record an error on result when value fails the rule"""
        try:
            ok = bool(self.validator(value))
            message = self.message
        except Exception as e:
            ok = False
            message = f"Validation error: {str(e)}"
        if not ok:
            result.add_error(field, message, value, self.name, line)
        return ok


class ConfigKeyValidator:
    """Checks the keys of a flat experiment configuration against the known sections and fields"""

    def __init__(self, known_fields: Dict[str, Iterable[str]]):
        self.known_fields = {section: set(fields) for section, fields in known_fields.items()}
        self.rules: Dict[str, ValidationRule] = {
            "key_format": ValidationRule("key_format", lambda k: bool(KEY_PATTERN.match(k)),
                                         "Key must look like section.field"),
            "known_section": ValidationRule("known_section", lambda k: k.split(".", 1)[0] in self.known_fields,
                                            "Unknown configuration section"),
            "known_field": ValidationRule("known_field", self._is_known_field, "Unknown configuration key"),
        }

    def _is_known_field(self, key: str) -> bool:
        section, field = key.split(".", 1)
        return field in self.known_fields.get(section, ())

    def validate_key(self, key: str, result: ValidationResult, line: Optional[int] = None) -> bool:
        """Apply the key rules in order; stop at the first failure"""
        for rule in self.rules.values():
            if not rule.check(key, key, result, line):
                return False
        return True
