"""Versioned key/value configuration files and seed derivation.

A config file is INI-style text with a ``[kanfraud]`` header section that
carries ``version = 1`` and any of the sections ``pipeline``, ``search``,
``ga`` and ``kan``::

    [kanfraud]
    version = 1

    [pipeline]
    label_column = Class
    positive_label = 1
    cap = 7500
    fractions = 0.7, 0.1, 0.2

    [search]
    width2 = 3..30
    k = 3..20
    grid = 3..30

    [ga]
    population = 20
    generations = 20

    [kan]
    width = 30, 15, 1
    k = 15
    grid = 5

Unknown keys are rejected so a typo cannot silently fall back to a default.
"""
import configparser
import hashlib
import io
import json
from dataclasses import asdict, dataclass, fields

import numpy as np

from .data import DEFAULT_FRACTIONS
from .exceptions import ConfigError, MissingFileError
from .kan import KanConfig
from .tuning import GaConfig, SearchSpace

__all__ = [
    "CONFIG_VERSION",
    "PipelineConfig",
    "RunConfig",
    "read_config",
    "write_config",
    "parse_range",
    "derive_seed",
    "config_digest",
    "SEED_STAGES",
]

CONFIG_VERSION = 1

# counter for each randomised stage; a stage seed is SeedSequence([seed, counter])
SEED_STAGES = {
    "balance": 0,
    "split": 1,
    "init": 2,
    "tune": 3,
    "assess": 4,
    "baseline": 5,
}


def derive_seed(seed, stage):
    """Independent 32-bit seed for ``stage`` from the run seed."""
    if stage not in SEED_STAGES:
        raise ConfigError(f"unknown seed stage {stage!r}")
    ss = np.random.SeedSequence([int(seed), SEED_STAGES[stage]])
    return int(ss.generate_state(1)[0])


@dataclass
class PipelineConfig:
    label_column: str = "Class"
    positive_label: str = "1"
    cap: int = 7500
    fractions: tuple = DEFAULT_FRACTIONS


@dataclass
class RunConfig:
    pipeline: PipelineConfig
    search: SearchSpace
    ga: GaConfig
    kan: dict  # KanConfig fields other than width; width lives under "width" when given

    def to_dict(self):
        return {
            "pipeline": asdict(self.pipeline),
            "search": {"width2": list(self.search.width2), "k": list(self.search.k), "grid": list(self.search.grid)},
            "ga": asdict(self.ga),
            "kan": dict(self.kan),
        }


def parse_range(text):
    """``"3..30"`` -> ``(3, 30)``; a single integer is a one-point range."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        v = int(text)
        return v, v
    except ValueError:
        raise ConfigError(f"cannot parse integer range {text!r}") from None


def _floats(text):
    return tuple(float(v) for v in str(text).replace(" ", "").split(",") if v)


def _ints(text):
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


_KAN_KEYS = {
    "width": _ints,
    "k": int,
    "grid": int,
    "epochs": int,
    "learning_rate": float,
    "seed": int,
    "threshold": float,
    "domain": _floats,
}
_PIPELINE_KEYS = {"label_column": str, "positive_label": str, "cap": int, "fractions": _floats}
_GA_KEYS = {f.name: (float if f.type is float else int) for f in fields(GaConfig)}
_SEARCH_KEYS = {"width2": parse_range, "k": parse_range, "grid": parse_range}


def _section(parser, name, schema):
    if not parser.has_section(name):
        return {}
    out = {}
    for key, value in parser.items(name):
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in [{name}]")
        try:
            out[key] = schema[key](value)
        except ValueError:
            raise ConfigError(f"bad value for {name}.{key}: {value!r}") from None
    return out


def read_config(path=None, text=None):
    """Parse a config file (or ``text``) into a :class:`RunConfig`.

    Absent sections and keys take their defaults; ``path=None`` and
    ``text=None`` give an all-default config.
    """
    parser = configparser.ConfigParser(interpolation=None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            raise MissingFileError(f"config file not found: {path}") from None
    if text is not None:
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        if not parser.has_option("kanfraud", "version"):
            raise ConfigError("config is missing [kanfraud] version")
        if parser.get("kanfraud", "version").strip() != str(CONFIG_VERSION):
            raise ConfigError(f"unsupported config version {parser.get('kanfraud', 'version')!r}")
        unknown = set(parser.sections()) - {"kanfraud", "pipeline", "search", "ga", "kan"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    pipeline = PipelineConfig(**_section(parser, "pipeline", _PIPELINE_KEYS))
    search = SearchSpace(**_section(parser, "search", _SEARCH_KEYS))
    ga = GaConfig(**_section(parser, "ga", _GA_KEYS))
    kan = _section(parser, "kan", _KAN_KEYS)
    return RunConfig(pipeline, search, ga, kan)


def kan_config_text(config):
    """Config-file text holding one fully specified ``[kan]`` section."""
    parser = configparser.ConfigParser(interpolation=None)
    parser["kanfraud"] = {"version": str(CONFIG_VERSION)}
    parser["kan"] = {
        "width": ", ".join(str(w) for w in config.width),
        "k": str(config.k),
        "grid": str(config.grid),
        "epochs": str(config.epochs),
        "learning_rate": repr(config.learning_rate),
        "seed": str(config.seed),
        "threshold": repr(config.classification_threshold),
        "domain": f"{config.domain[0]!r}, {config.domain[1]!r}",
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def write_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(kan_config_text(config))


def kan_config_from(section, width, seed=None):
    """Build a :class:`KanConfig` from a parsed ``[kan]`` section."""
    params = dict(section)
    params.setdefault("width", width)
    if "threshold" in params:
        params["classification_threshold"] = params.pop("threshold")
    if seed is not None and "seed" not in section:
        params["seed"] = seed
    try:
        return KanConfig(**params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_digest(obj):
    """SHA-256 of the canonical JSON form of ``obj``."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
