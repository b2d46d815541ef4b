import json
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import load_dotenv

from tools.errors import ConfigError

load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = PROJECT_ROOT / "configs"
ENV_PREFIX = "DECOMPOUND_"
LIBRARY_VERSION = "0.1.0"


def resolve_project_path(path: Union[str, os.PathLike]) -> Path:
    """Paths that do not exist relative to the working directory are taken from the project root."""
    path = Path(path)
    if path.is_absolute() or path.exists():
        return path
    return PROJECT_ROOT / path


def read_json_file(path: Union[str, os.PathLike]):
    """Read JSON file from disk and return parsed object."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"JSON file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Invalid JSON in {path}: {exc}") from exc


def write_json_file(path: Union[str, os.PathLike], payload: Any) -> str:
    """Write payload as pretty JSON with sorted keys so reruns are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    return str(path)


def load_config(config_path: Optional[Union[str, os.PathLike]] = None, command: str = "simulate") -> Dict[str, Any]:
    """
    Load configuration file from configs directory

    Args:
        config_path: Configuration file path, if None use the command's default config
        command: Subcommand name used to pick configs/default_<command>_config.json

    Returns:
        dict: Configuration dictionary

    Raises:
        ConfigError: If the file is missing or not a JSON object
    """
    if config_path is None:
        config_path = CONFIG_DIR / f"default_{command}_config.json"
    else:
        config_path = resolve_project_path(config_path)

    if not config_path.exists():
        raise ConfigError(f"Configuration file does not exist: {config_path}")

    config = read_json_file(config_path)
    if not isinstance(config, dict):
        raise ConfigError(f"Configuration file must contain a JSON object: {config_path}")
    return config


def get_config_value(key: str, default=None):
    """Look up DECOMPOUND_<KEY> in the environment (.env included), else default."""
    env_key = ENV_PREFIX + key.upper()
    raw = os.environ.get(env_key)
    if raw is None:
        return default
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def resolve_config(
    defaults: Mapping[str, Any],
    file_values: Optional[Mapping[str, Any]] = None,
    flag_values: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Merge configuration layers: CLI flags > environment > config file > defaults.

    Args:
        defaults: Every allowed key with its default value
        file_values: Values from the JSON config file
        flag_values: Values given on the command line (None means "not given")

    Returns:
        The resolved configuration

    Raises:
        ConfigError: If a config-file or flag key is not one of the allowed keys
    """
    file_values = dict(file_values or {})
    flag_values = {k: v for k, v in (flag_values or {}).items() if v is not None}

    unknown = sorted(set(file_values) - set(defaults))
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}", keys=unknown)
    unknown = sorted(set(flag_values) - set(defaults))
    if unknown:
        raise ConfigError(f"Unknown option keys: {', '.join(unknown)}", keys=unknown)

    resolved = dict(defaults)
    resolved.update(file_values)
    for key in defaults:
        env_value = get_config_value(key)
        if env_value is not None:
            resolved[key] = env_value
    resolved.update(flag_values)
    return resolved


def parse_float_list(value: Union[str, float, int, list, tuple]) -> list:
    """Parse "100,1000,5000" or a JSON list into a list of numbers."""
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    try:
        return [float(part) for part in str(value).split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"Cannot parse number list: {value!r}") from exc
