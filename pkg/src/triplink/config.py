"""Run configuration: one JSON file, environment overrides, then flag overrides."""

import dataclasses
import json
import math
import os
from dataclasses import dataclass

from .augment import PERTURB_SCOPES
from .errors import ConfigError
from .similarity import BANDWIDTH_MODES

ENV_PREFIX = "TRIPLINK_"

# JSON keys that map to differently-named fields
KEY_ALIASES = {"lambda": "lambda_weight"}


@dataclass
class RunConfig:
    # input tables (required by ingest)
    peptide_table: str = None
    microbe_table: str = None
    disease_table: str = None
    edge_table: str = None
    out_dir: str = "out"
    # preprocessing
    match: float = 2.0
    mismatch: float = -1.0
    gap_open: float = -2.0
    gap_extend: float = -1.0
    redundancy_threshold: float = 0.7
    gip_bandwidth_mode: str = "paper"
    gamma_prime: float = 1.0
    # augmentation
    tau: float = 0.4
    drop_rate: float = 0.2
    perturb_scope: str = "all"
    # model
    embed_dim: int = 128
    gcn_layers: int = 2
    attn_heads: int = 4
    mlp_hidden: int = 64
    lambda_weight: float = 1.0
    contrastive: bool = True
    # optimizer
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 200
    # evaluation
    k: int = 5
    ratio: float = 1.0
    repetitions: int = 1
    threshold: float = 0.5
    top_n: int = 10
    seed: int = 0

    def estimator_kwargs(self):
        return {
            "embed_dim": self.embed_dim,
            "gcn_layers": self.gcn_layers,
            "attn_heads": self.attn_heads,
            "mlp_hidden": self.mlp_hidden,
            "lambda_weight": self.lambda_weight,
            "tau": self.tau,
            "drop_rate": self.drop_rate,
            "perturb_scope": self.perturb_scope,
            "contrastive": self.contrastive,
            "epochs": self.epochs,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "seed": self.seed,
        }


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def parse_ratio(value):
    """Accept a number of negatives per positive, or a '1:n' string."""
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 2 or parts[0].strip() != "1":
            raise ConfigError(f"ratio must be a number or '1:n', got {value!r}")
        try:
            return float(parts[1])
        except ValueError:
            raise ConfigError(f"ratio must be a number or '1:n', got {value!r}") from None
    return float(value)


def _coerce(name, value):
    field = _FIELDS[name]
    if name == "ratio":
        return parse_ratio(value)
    if field.type is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected a boolean, got {value!r}")
        return value
    if field.type is int:
        if isinstance(value, bool) or isinstance(value, str) or (
            isinstance(value, float) and not value.is_integer()
        ):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return int(value)
    if field.type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if value is not None and not isinstance(value, str):
        raise ConfigError(f"{name}: expected a string, got {value!r}")
    return value


def _parse_env_value(name, raw):
    if name == "ratio":
        return parse_ratio(raw)
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def validate(config):
    """Range-check every field; raises ConfigError listing all problems."""
    problems = []

    def require(condition, message):
        if not condition:
            problems.append(message)

    require(config.match > 0, "match must be > 0")
    require(config.mismatch <= 0, "mismatch must be <= 0")
    require(config.gap_open <= 0, "gap_open must be <= 0")
    require(config.gap_extend <= 0, "gap_extend must be <= 0")
    require(0.0 <= config.redundancy_threshold <= 1.0, "redundancy_threshold must be in [0, 1]")
    require(config.gip_bandwidth_mode in BANDWIDTH_MODES,
            f"gip_bandwidth_mode must be one of {BANDWIDTH_MODES}")
    require(config.gamma_prime >= 0, "gamma_prime must be >= 0")
    require(math.isfinite(config.tau), "tau must be finite")
    require(0.0 <= config.drop_rate < 1.0, "drop_rate must be in [0, 1)")
    require(config.perturb_scope in PERTURB_SCOPES,
            f"perturb_scope must be one of {PERTURB_SCOPES}")
    require(config.embed_dim >= 1, "embed_dim must be >= 1")
    require(config.gcn_layers >= 1, "gcn_layers must be >= 1")
    require(config.attn_heads >= 1, "attn_heads must be >= 1")
    require(config.embed_dim % max(config.attn_heads, 1) == 0,
            "embed_dim must be divisible by attn_heads")
    require(config.mlp_hidden >= 1, "mlp_hidden must be >= 1")
    require(config.lambda_weight >= 0, "lambda must be >= 0")
    require(config.lr > 0, "lr must be > 0")
    require(0.0 <= config.beta1 < 1.0, "beta1 must be in [0, 1)")
    require(0.0 <= config.beta2 < 1.0, "beta2 must be in [0, 1)")
    require(config.eps > 0, "eps must be > 0")
    require(config.epochs >= 1, "epochs must be >= 1")
    require(config.k >= 2, "k must be >= 2")
    require(config.ratio > 0, "ratio must be > 0")
    require(config.repetitions >= 1, "repetitions must be >= 1")
    require(0.0 <= config.threshold <= 1.0, "threshold must be in [0, 1]")
    require(config.top_n >= 1, "top_n must be >= 1")
    if problems:
        raise ConfigError("invalid configuration: " + "; ".join(problems))
    return config


def load_config(path, env=None, overrides=None):
    """Build a validated RunConfig from JSON + env + explicit overrides.

    Precedence: overrides (CLI flags) > TRIPLINK_* environment variables >
    file values > defaults. Unknown keys are rejected.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    values = {}
    for key, value in raw.items():
        name = KEY_ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        values[name] = _coerce(name, value)

    env = os.environ if env is None else env
    for key, raw_value in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):].lower()
        name = KEY_ALIASES.get(name, name)
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key in environment variable {key}")
        values[name] = _coerce(name, _parse_env_value(name, raw_value))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        name = KEY_ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigError(f"unknown config override {key!r}")
        values[name] = _coerce(name, value)

    return validate(RunConfig(**values))
