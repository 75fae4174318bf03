import tomllib
from collections.abc import Mapping
from pathlib import Path
from typing import Any

__all__ = ("flatten", "load_config_file", "merge_config", "section")


def flatten(data: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    """`{"model": {"cell_size": 4}}` -> `{"model.cell_size": 4}`."""
    flat: dict[str, Any] = {}
    for key, value in data.items():
        _key = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{_key}."))
        else:
            flat[_key] = value
    return flat


def load_config_file(path: Path | None) -> dict[str, Any]:
    """Read a TOML run configuration into flat dotted keys; relative `data.*` paths are resolved from the file."""
    if path is None:
        return {}
    with path.open("rb") as f:
        try:
            values = flatten(tomllib.load(f))
        except tomllib.TOMLDecodeError as e:
            raise ValueError(f"Invalid config file {str(path)!r}: {e}") from e
    for key, value in values.items():
        if key.startswith("data.") and isinstance(value, str) and not Path(value).is_absolute():
            values[key] = str(path.parent / value)
    return values


def merge_config(file_values: Mapping[str, Any], flags: Mapping[str, Any]) -> dict[str, Any]:
    """Flags explicitly given (not None) take precedence over file values."""
    return {**file_values, **{k: v for k, v in flags.items() if v is not None}}


def section(config: Mapping[str, Any], name: str) -> dict[str, Any]:
    """Keys under `name.`, without the prefix."""
    _prefix = f"{name}."
    return {k.removeprefix(_prefix): v for k, v in config.items() if k.startswith(_prefix)}
