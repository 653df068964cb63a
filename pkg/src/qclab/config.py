"""JSON experiment configs: shipped defaults, validation by example, and builders.

A user config is merged onto the shipped default for its subcommand.  The
default doubles as the schema: every key must already exist there, and
values must keep the default's JSON type (ints are accepted for floats).
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .grid import GridSpec
from .potentials import PotentialSpec, linear_ramp, sinusoid

SUBCOMMANDS = ("decompose", "evolve", "spread", "ehrenfest", "constrained", "action", "born",
               "twobody", "geometry")


def default_config(name: str) -> dict:
    if name not in SUBCOMMANDS:
        raise ConfigError(f"no default config for {name!r}")
    text = resources.files("qclab.configs").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def _type_ok(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, list):
        return isinstance(value, list)
    if default is None:
        return True
    return isinstance(value, type(default))


def merge(default: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(default)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in default:
            raise ConfigError(f"unknown config key {where!r}")
        base = default[key]
        if isinstance(base, dict) and not base.get("family") and isinstance(value, dict):
            out[key] = merge(base, value, where)
        elif isinstance(base, dict):
            # potentials are replaced whole: their keys depend on the family
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be an object")
            out[key] = copy.deepcopy(value)
        elif not _type_ok(base, value):
            raise ConfigError(f"{where!r} has type {type(value).__name__}, "
                              f"expected {type(base).__name__}")
        else:
            out[key] = value
    return out


def load_config(name: str, path: str | Path | None = None) -> dict:
    cfg = default_config(name)
    if path is None:
        return cfg
    try:
        override = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(override, dict):
        raise ConfigError("config must be a JSON object")
    override.pop("subcommand", None)
    return merge(cfg, override)


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    mass: float = 1.0


def grid_from_config(d: dict) -> GridSpec:
    try:
        return GridSpec(int(d.get("dim", 1)), int(d["n"]), float(d["L"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad grid block {d}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def units_from_config(d: dict) -> Units:
    u = Units(float(d.get("hbar", 1.0)), float(d.get("mass", 1.0)))
    if u.hbar <= 0 or u.mass <= 0:
        raise ConfigError("hbar and mass must be positive")
    return u


def _schedule(d: dict | None):
    if not d:
        return None
    kind = d.get("kind")
    if kind == "ramp":
        return linear_ramp(float(d["rate"]), float(d.get("offset", 1.0)))
    if kind == "sinusoid":
        return sinusoid(float(d["amplitude"]), float(d["frequency"]), float(d.get("offset", 1.0)))
    raise ConfigError(f"unknown schedule kind {kind!r}")


def potential_from_config(d: dict) -> PotentialSpec:
    """``{"family": ..., family parameters, optional "schedule": {...}}``."""
    d = dict(d)
    family = d.pop("family", None)
    schedule = _schedule(d.pop("schedule", None))
    mode = d.pop("schedule_mode", "multiplicative")
    try:
        if family == "free":
            spec = PotentialSpec.free(schedule=schedule, schedule_mode=mode)
        elif family == "linear":
            spec = PotentialSpec.linear(d.pop("force"), schedule=schedule, schedule_mode=mode)
        elif family == "harmonic":
            spec = PotentialSpec.harmonic(float(d.pop("stiffness")), d.pop("center", 0.0),
                                          schedule=schedule, schedule_mode=mode)
        elif family == "coupled":
            spec = PotentialSpec.coupled(float(d.pop("stiffness")), schedule=schedule,
                                         schedule_mode=mode)
        else:
            raise ConfigError(f"unknown potential family {family!r}")
    except KeyError as exc:
        raise ConfigError(f"potential {family!r} missing parameter {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if d:
        raise ConfigError(f"unexpected potential keys {sorted(d)}")
    return spec
