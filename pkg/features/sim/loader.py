import json
import logging
from pathlib import Path

from pydantic import ValidationError

from features.sim.models import ScenarioConfig
from lib.config import get_settings
from lib.errors import ScenarioValidationError

logger = logging.getLogger(__name__)

_decoder = json.JSONDecoder()
_WHITESPACE = " \t\n\r"


def _skip(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in _WHITESPACE:
        pos += 1
    return pos


def _child(text: str, pos: int, part) -> int | None:
    """Return the offset of member `part` of the object or array starting at pos."""
    if pos >= len(text) or text[pos] not in "{[":
        return None
    is_object = text[pos] == "{"
    pos, index = _skip(text, pos + 1), 0
    while pos < len(text) and text[pos] not in "}]":
        if is_object:
            key, pos = _decoder.raw_decode(text, pos)
            pos = _skip(text, _skip(text, pos) + 1)
            match = key == str(part)
        else:
            match = index == part
        if match:
            return pos
        _, pos = _decoder.raw_decode(text, pos)
        pos, index = _skip(text, pos), index + 1
        if pos < len(text) and text[pos] == ",":
            pos = _skip(text, pos + 1)
    return None


def locate(text: str, loc: tuple) -> tuple[int, int]:
    """
    Return the line and column of the deepest value on a validation error's location path.

    Parts that are not JSON members (union or validator tags) end the descent.
    """
    pos = _skip(text, 0)
    for part in loc:
        child = _child(text, pos, part)
        if child is None:
            break
        pos = child
    line = text.count("\n", 0, pos) + 1
    return line, pos - text.rfind("\n", 0, pos)


def _format_errors(text: str, source: str, exc: ValidationError) -> str:
    messages = []
    for error in exc.errors():
        line, column = locate(text, error["loc"])
        field = ".".join(str(part) for part in error["loc"]) or "<root>"
        messages.append(f"{source}:{line}:{column}: {field}: {error['msg']}")
    return "; ".join(messages)


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioConfig:
    """
    Parse and validate a JSON scenario.

    :param text: The JSON document.
    :param source: Name used in error messages.

    returns: The validated configuration.

    :raises ScenarioValidationError: With the line and column of the offending value.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ScenarioValidationError(_format_errors(text, source, exc)) from exc


def load_scenario(path: str | Path, seed: int | None = None) -> ScenarioConfig:
    """
    Load a scenario file.

    Relative names that do not exist are looked up in the configured scenario directory.

    :param path: The file path or a scenario name ("benign" or "benign.json").
    :param seed: Overrides the seed of the file.

    returns: The validated configuration.

    :raises ScenarioValidationError: If the file is missing or invalid.
    """
    path = Path(path)
    if not path.exists():
        candidate = Path(get_settings().scenario_dir) / path
        path = candidate if candidate.exists() else candidate.with_suffix(".json")
    if not path.exists():
        raise ScenarioValidationError(f"Scenario file {path} does not exist.")
    config = parse_scenario(path.read_text(encoding="utf-8"), source=str(path))
    if seed is not None:
        config = config.with_seed(seed)
    logger.info("loaded scenario %s (seed %s)", config.name, config.seed)
    return config
