from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple
from pathlib import Path
import configparser
import json
import os
from ..common import get_path, text_digest
from ..errors import ConfigError, UsageError

DEFAULTS_INI = get_path("../defaults.ini", __file__)
ENV_PREFIX = "HARMONIZER_"
SUBCOMMANDS = ("analyze", "harmonize", "evaluate", "repgeom", "scatter", "remap", "merge")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")

def _optional(convert: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def wrapped(value):
        if value is None or (isinstance(value, str) and not value.strip()):
            return None
        return convert(value)
    return wrapped

# option -> (converter, environment variable)
OPTIONS: Dict[str, Tuple[Callable[[Any], Any], str]] = {
    "log_level": (lambda v: str(v).upper(), "LOG_LEVEL"),
    "workers": (int, "WORKERS"),
    "seed": (int, "SEED"),
    "map": (_optional(str), "MAP"),
    "normalize_by_page": (_bool, "NORMALIZE_BY_PAGE"),
    "agent": (str, "AGENT"),
    "rules": (str, "RULES"),
    "mapping": (str, "MAPPING"),
    "policy": (str, "POLICY"),
    "images": (_optional(str), "IMAGES"),
    "endpoint": (_optional(str), "VLM_ENDPOINT"),
    "model": (str, "VLM_MODEL"),
    "api_key_env": (str, "VLM_API_KEY_ENV"),
    "timeout": (float, "VLM_TIMEOUT"),
    "max_retries": (int, "VLM_MAX_RETRIES"),
    "concurrency": (int, "VLM_CONCURRENCY"),
    "temperature": (float, "VLM_TEMPERATURE"),
    "backoff_base": (float, "VLM_BACKOFF_BASE"),
    "backoff_factor": (float, "VLM_BACKOFF_FACTOR"),
    "iou_threshold": (float, "IOU_THRESHOLD"),
    "shift_window": (int, "SHIFT_WINDOW"),
    "k": (int, "K"),
    "remap": (str, "REMAP"),
    "sample_cap": (_optional(int), "SAMPLE_CAP"),
    "name": (str, "MERGE_NAME"),
}

# input option -> whether it holds several paths
INPUTS: Dict[str, Dict[str, bool]] = {
    "analyze": {"inputs": True},
    "harmonize": {"input": False},
    "evaluate": {"pred": False, "ref": False},
    "repgeom": {"embeddings": False},
    "scatter": {"geometry": False},
    "remap": {"input": False},
    "merge": {"inputs": True},
}

@dataclass(frozen=True)
class JobConfig:
    """A validated invocation: which subcommand, on which files, with which options."""
    subcommand: str
    inputs: Mapping[str, Any]
    out: str
    options: Mapping[str, Any] = field(default_factory=dict)

    @property
    def log_level(self) -> str:
        return self.options.get("log_level", "INFO")

    @property
    def workers(self) -> int:
        return self.options.get("workers", 1)

    @property
    def seed(self) -> int:
        return self.options.get("seed", 0)

    def __getitem__(self, option: str):
        return self.options[option]

    def input_paths(self) -> List[str]:
        paths = []
        for value in self.inputs.values():
            paths.extend(value if isinstance(value, list) else [value])
        return paths

    def to_dict(self) -> Dict[str, object]:
        return {
            "subcommand": self.subcommand,
            "inputs": dict(self.inputs),
            "out": self.out,
            "options": dict(sorted(self.options.items())),
        }

    def config_hash(self) -> str:
        return text_digest(json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False))

def _read_ini(path: str, subcommand: str, must_exist: bool) -> Dict[str, str]:
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path, encoding="utf-8")
    except configparser.Error as err:
        raise ConfigError(f"Cannot parse config file {path}: {err}") from err
    if must_exist and not read:
        raise ConfigError(f"Config file {path} does not exist")
    values: Dict[str, str] = {}
    for section in ("default", subcommand):
        if parser.has_section(section):
            values.update(parser.items(section))
    return values

def _convert(option: str, value, source: str):
    converter = OPTIONS[option][0]
    try:
        return converter(value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"Invalid value {value!r} for '{option}' from {source}") from err

def layered_options(subcommand: str, flags: Mapping[str, Any], config_path: Optional[str] = None,
                    environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """
    Merges option values with precedence flags > config file > environment >
    shipped defaults. Only options that the subcommand's defaults section (or
    [default]) declares are kept.
    """
    environ = os.environ if environ is None else environ
    defaults = _read_ini(DEFAULTS_INI, subcommand, must_exist=True)
    options = {name: _convert(name, value, "defaults.ini") for name, value in defaults.items() if name in OPTIONS}

    for name in list(options):
        env_name = ENV_PREFIX + OPTIONS[name][1]
        if env_name in environ:
            options[name] = _convert(name, environ[env_name], env_name)
    if config_path:
        for name, value in _read_ini(config_path, subcommand, must_exist=True).items():
            if name not in options:
                raise ConfigError(f"Unknown option '{name}' for {subcommand} in {config_path}")
            options[name] = _convert(name, value, config_path)
    for name, value in flags.items():
        if value is not None and name in options:
            options[name] = _convert(name, value, f"--{name.replace('_', '-')}")
    return options

def _validate(subcommand: str, options: Dict[str, Any]) -> None:
    checks = [
        ("log_level", lambda v: v in LOG_LEVELS, f"one of {', '.join(LOG_LEVELS)}"),
        ("workers", lambda v: v >= 1, ">= 1"),
        ("agent", lambda v: v in ("rule", "vlm"), "rule or vlm"),
        ("timeout", lambda v: v > 0, "> 0"),
        ("max_retries", lambda v: v >= 0, ">= 0"),
        ("concurrency", lambda v: v >= 1, ">= 1"),
        ("iou_threshold", lambda v: 0 < v <= 1, "in (0, 1]"),
        ("shift_window", lambda v: v >= 0, ">= 0"),
        ("k", lambda v: v >= 1, ">= 1"),
        ("sample_cap", lambda v: v is None or v >= 1, ">= 1"),
    ]
    for name, ok, expected in checks:
        if name in options and not ok(options[name]):
            raise ConfigError(f"Option '{name}' must be {expected}, got {options[name]!r}")
    if options.get("agent") == "vlm" and not options.get("endpoint"):
        raise ConfigError(f"The vlm agent needs --endpoint (or {ENV_PREFIX}VLM_ENDPOINT)")

def resolve_config(subcommand: str, flags: Mapping[str, Any], config_path: Optional[str] = None,
                   environ: Optional[Mapping[str, str]] = None) -> JobConfig:
    """
    Builds the JobConfig of one invocation from parsed flags. Input paths
    must exist; missing ones are usage errors.
    """
    if subcommand not in SUBCOMMANDS:
        raise UsageError(f"Unknown subcommand '{subcommand}'")
    inputs: Dict[str, Any] = {}
    for name, many in INPUTS[subcommand].items():
        value = flags.get(name)
        if not value:
            raise UsageError(f"{subcommand} needs --{name}")
        paths = list(value) if many else [value]
        missing = [p for p in paths if not Path(p).is_file()]
        if missing:
            raise UsageError(f"Input file(s) not found: {', '.join(missing)}")
        inputs[name] = paths if many else value
    out = flags.get("out")
    if not out:
        raise UsageError(f"{subcommand} needs --out")

    options = layered_options(subcommand, flags, config_path, environ)
    _validate(subcommand, options)
    return JobConfig(subcommand, inputs, str(out), options)
