"""Service and scoring configuration from TOML/JSON files and environment.

Environment variables prefixed SCHOLREC_ override file keys, so deployments
can tune a shared config file without editing it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ValidationError
from .scorer import ScoringConfig

ENV_PREFIX = "SCHOLREC_"

_TRUE_VALUES = {"1", "true", "yes", "on"}
_FALSE_VALUES = {"0", "false", "no", "off"}


@dataclass
class AppConfig:
    """Everything the service needs beyond the scoring knobs."""

    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    port: int = 8000
    log_level: str = "info"
    cors_allowlist: list[str] = field(default_factory=list)
    global_ban_threshold: int = 3
    exclude_own_repository: bool = False
    recommend_timeout_seconds: float = 5.0
    corpus: str | None = None
    indicators: str | None = None
    citations: str | None = None
    feedback_log: str | None = None
    event_log: str | None = None

    def validate(self) -> None:
        self.scoring.validate()
        if not 1 <= self.port <= 65535:
            raise ValidationError(f"port {self.port} out of range", field="port")
        if self.global_ban_threshold < 1:
            raise ValidationError(
                "global_ban_threshold must be >= 1", field="global_ban_threshold"
            )
        if self.recommend_timeout_seconds <= 0:
            raise ValidationError(
                "recommend_timeout_seconds must be > 0",
                field="recommend_timeout_seconds",
            )


def _read_config_file(path: Path) -> dict[str, Any]:
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    with open(path, "r", encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"config {path}: top level must be an object")
    return obj


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE_VALUES:
        return True
    if lowered in _FALSE_VALUES:
        return False
    raise ValidationError(f"cannot parse boolean from {value!r}", field=key)


_STR_KEYS = ("log_level", "corpus", "indicators", "citations", "feedback_log", "event_log")
_SCORING_FLOAT_KEYS = ("decay_half_life_years", "popularity_beta")
_SCORING_INT_KEYS = ("candidate_pool_size", "cache_capacity")


def load_app_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> AppConfig:
    """Build the effective configuration: defaults, then file, then env."""
    env = os.environ if env is None else env
    obj: dict[str, Any] = {}
    if path is not None:
        obj = _read_config_file(Path(path))

    config = AppConfig()
    scoring_obj = obj.get("scoring", {})
    if not isinstance(scoring_obj, dict):
        raise ValidationError("config key 'scoring' must be a table", field="scoring")
    try:
        config.scoring = ScoringConfig.from_obj(scoring_obj)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid scoring config: {exc}", field="scoring") from exc

    if "port" in obj:
        config.port = int(obj["port"])
    if "cors_allowlist" in obj:
        allowlist = obj["cors_allowlist"]
        if not isinstance(allowlist, list):
            raise ValidationError("cors_allowlist must be a list", field="cors_allowlist")
        config.cors_allowlist = [str(origin) for origin in allowlist]
    if "global_ban_threshold" in obj:
        config.global_ban_threshold = int(obj["global_ban_threshold"])
    if "exclude_own_repository" in obj:
        config.exclude_own_repository = bool(obj["exclude_own_repository"])
    if "recommend_timeout_seconds" in obj:
        config.recommend_timeout_seconds = float(obj["recommend_timeout_seconds"])
    for key in _STR_KEYS:
        if obj.get(key) is not None:
            setattr(config, key, str(obj[key]))

    _apply_env_overrides(config, env)
    config.validate()
    return config


def _apply_env_overrides(config: AppConfig, env: Mapping[str, str]) -> None:
    def lookup(key: str) -> str | None:
        return env.get(ENV_PREFIX + key.upper())

    try:
        if (value := lookup("port")) is not None:
            config.port = int(value)
        if (value := lookup("global_ban_threshold")) is not None:
            config.global_ban_threshold = int(value)
        if (value := lookup("recommend_timeout_seconds")) is not None:
            config.recommend_timeout_seconds = float(value)
        if (value := lookup("exclude_own_repository")) is not None:
            config.exclude_own_repository = _parse_bool(value, "exclude_own_repository")
        if (value := lookup("cors_allowlist")) is not None:
            config.cors_allowlist = [
                origin.strip() for origin in value.split(",") if origin.strip()
            ]
        for key in _STR_KEYS:
            if (value := lookup(key)) is not None:
                setattr(config, key, value)
        for key in _SCORING_FLOAT_KEYS:
            if (value := lookup(key)) is not None:
                setattr(config.scoring, key, float(value))
        for key in _SCORING_INT_KEYS:
            if (value := lookup(key)) is not None:
                setattr(config.scoring, key, int(value))
        if (value := lookup("field_boosts")) is not None:
            boosts = json.loads(value)
            if not isinstance(boosts, dict):
                raise ValidationError(
                    "SCHOLREC_FIELD_BOOSTS must be a JSON object", field="field_boosts"
                )
            config.scoring.field_boosts = {str(k): float(v) for k, v in boosts.items()}
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid environment override: {exc}") from exc


__all__ = ["AppConfig", "ENV_PREFIX", "load_app_config"]
