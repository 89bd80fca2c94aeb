"""Strict JSON <-> ScenarioConfig mapping.

Keys mirror the dataclass field names; nested sections (``attack``, ``ids``,
``ssd_params``, ``pid_gains``, ``limits``, ``schedule``) are objects and
``lead_profile`` carries a ``kind`` discriminator. Unknown keys are errors.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Any

from accsim.attacker import AttackConfig
from accsim.canbus import BusSchedule
from accsim.controller import PidGains, SsdParams
from accsim.dynamics import ActuationLimits
from accsim.ids import IdsConfig
from accsim.scenario import ConstantProfile, ReplayProfile, ScenarioConfig, TrapezoidProfile


class ConfigError(ValueError):
    pass


_SECTIONS = {
    "attack": AttackConfig,
    "ids": IdsConfig,
    "ssd_params": SsdParams,
    "pid_gains": PidGains,
    "limits": ActuationLimits,
    "schedule": BusSchedule,
}
_PROFILES = {"constant": ConstantProfile, "trapezoid": TrapezoidProfile, "replay": ReplayProfile}


def _init_fields(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls) if f.init}


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - _init_fields(cls))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _profile(data: Any, base: Path | None):
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError("lead_profile: expected an object with a 'kind' key")
    data = dict(data)
    kind = data.pop("kind")
    if kind not in _PROFILES:
        raise ConfigError(f"lead_profile.kind: unknown kind {kind!r}")
    if kind == "replay" and base is not None and "path" in data:
        p = Path(data["path"])
        data["path"] = str(p if p.is_absolute() else base / p)
    return _build(_PROFILES[kind], data, f"lead_profile ({kind})")


def config_from_dict(data: dict, base_dir: Path | None = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    unknown = sorted(set(data) - _init_fields(ScenarioConfig))
    if unknown:
        raise ConfigError(f"top level: unknown key(s) {', '.join(unknown)}")
    kwargs = dict(data)
    if "lead_profile" not in kwargs:
        raise ConfigError("top level: missing key lead_profile")
    kwargs["lead_profile"] = _profile(kwargs["lead_profile"], base_dir)
    for key, cls in _SECTIONS.items():
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = _build(cls, kwargs[key], key)
    return _build_top(kwargs)


def _build_top(kwargs: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"top level: {exc}") from exc


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(data, path.parent)


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return None
    return value


def config_to_dict(cfg: ScenarioConfig) -> dict:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            section = {g.name: _jsonable(getattr(value, g.name)) for g in dataclasses.fields(value) if g.init}
            if f.name == "lead_profile":
                section = {"kind": value.kind, **section}
            out[f.name] = section
        else:
            out[f.name] = value
    return out
