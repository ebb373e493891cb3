""" Rendering of run reports as dotted `key: value` text and JSON. """
import json
from pathlib import Path


def flatten(data: dict, prefix: str = "") -> dict:
    """
    Flatten a nested dictionary into dotted keys.

    Lists are kept as values; empty dictionaries disappear.

    :param data: The nested report.
    :param prefix: Key prefix of this level.

    returns: A flat dictionary.
    """
    flat = {}
    for key, value in data.items():
        name = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, dict):
            flat.update(flatten(value, name))
        else:
            flat[name] = value
    return flat


def _format_value(value) -> str:
    if isinstance(value, list):
        return ",".join(str(item) for item in value) if value else "[]"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_text(report: dict) -> str:
    """Return one `key: value` line per leaf, sorted by key."""
    flat = flatten(report)
    return "".join(f"{key}: {_format_value(flat[key])}\n" for key in sorted(flat))


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, out_dir: str | Path) -> tuple[Path, Path]:
    """
    Write report.txt and report.json.

    returns: The two paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_path, json_path = out_dir / "report.txt", out_dir / "report.json"
    text_path.write_text(render_text(report), encoding="utf-8")
    json_path.write_text(render_json(report), encoding="utf-8")
    return text_path, json_path
