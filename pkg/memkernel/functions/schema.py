"""Defaults and validation driven by a kind's ui_structure.json.

The schema lists properties in the n8n node format: `name`, `type`
(string | number | boolean | options | notice), `default`, optional
`typeOptions` (minValue, maxValue, numberPrecision), `options`,
`required` and `displayOptions.show`.
"""
import json
import logging
import os
from typing import Dict, List

from ..errors import ConfigError

logger = logging.getLogger(__name__)

# Keys every params file may carry besides the schema's own properties.
RESERVED = ("kind",)


def load_schema(path: str) -> List[dict]:
    try:
        with open(path, "r") as f:
            return json.load(f)["properties"]
    except (OSError, KeyError, json.JSONDecodeError) as e:
        raise ConfigError(f"Failed to read UI structure {path}: {e}") from e


def is_shown(prop: dict, params: dict) -> bool:
    show = prop.get("displayOptions", {}).get("show", {})
    return all(params.get(key) in allowed for key, allowed in show.items())


def _check_number(prop, value):
    name = prop["name"]
    if isinstance(value, bool):
        raise ConfigError(f"'{name}' must be a number, got {value!r}.")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{name}' must be a number, got {value!r}.")
    options = prop.get("typeOptions", {})
    if options.get("numberPrecision") == 0:
        if number != int(number):
            raise ConfigError(f"'{name}' must be an integer, got {value!r}.")
        number = int(number)
    if "minValue" in options and number < options["minValue"]:
        raise ConfigError(f"'{name}'={number} is below the minimum {options['minValue']}.")
    if "maxValue" in options and number > options["maxValue"]:
        raise ConfigError(f"'{name}'={number} is above the maximum {options['maxValue']}.")
    return number


def _check_value(prop, value):
    kind = prop["type"]
    name = prop["name"]
    if kind == "number":
        return _check_number(prop, value)
    if kind == "boolean":
        if not isinstance(value, bool):
            raise ConfigError(f"'{name}' must be true or false, got {value!r}.")
        return value
    if kind == "options":
        allowed = [option["value"] for option in prop.get("options", [])]
        if value not in allowed:
            raise ConfigError(f"'{name}' must be one of {allowed}, got {value!r}.")
        return value
    return value


def resolve(params: dict, schema: List[dict], base_dir: str = ".") -> Dict[str, object]:
    """Params with defaults filled in, validated against the schema.

    Shown `...FilePath` strings are resolved against base_dir and must exist.
    """
    known = {prop["name"] for prop in schema} | set(RESERVED)
    for key in sorted(set(params) - known):
        logger.warning("Ignoring unknown parameter %r.", key)

    resolved = {key: params[key] for key in RESERVED if key in params}
    for prop in schema:
        if prop["type"] == "notice":
            continue
        resolved[prop["name"]] = params.get(prop["name"], prop.get("default"))

    for prop in schema:
        name = prop["name"]
        if prop["type"] == "notice" or not is_shown(prop, resolved):
            continue
        value = resolved[name]
        if value is None or value == "":
            if prop.get("required"):
                raise ConfigError(f"'{prop.get('displayName', name)}' ({name}) is required.")
            continue
        value = _check_value(prop, value)
        if prop["type"] == "string" and name.endswith("FilePath"):
            value = os.path.normpath(os.path.join(base_dir, value))
            if not os.path.exists(value):
                raise ConfigError(f"File for '{name}' not found at path: {value}")
        resolved[name] = value
    return resolved


def parse_json_field(params: dict, name: str):
    """A list-valued parameter given either as JSON text or as a JSON array."""
    value = params.get(name)
    if value is None or value == "":
        return None
    if isinstance(value, str):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise ConfigError(f"'{name}' is not valid JSON: {e}") from e
    return value
