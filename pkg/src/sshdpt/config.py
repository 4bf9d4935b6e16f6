"""Run configuration: JSON documents validated against fixed schemas.

Every key a command accepts is listed in ``SCHEMAS`` along with its kind,
default and constraint. :func:`resolve` rejects unknown keys, fills defaults
and returns plain nested dicts; that resolved form is what runs consume and
what they write back as ``config.json``, so resolving it again is a no-op.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .datasets import TABLE_V

COMMANDS = ("quench", "disorder", "sweep", "mech", "spectrum")


class ConfigError(ValueError):
    pass


def _positive(x):
    return None if x > 0 else "must be positive"


def _non_negative(x):
    return None if x >= 0 else "must be non-negative"


def _ratio(x):
    return None if 0 <= x < 1 else "must lie in [0, 1)"


def _one_of(*choices):
    def check(x):
        return None if x in choices else f"must be one of {', '.join(map(str, choices))}"
    return check


def _all(check):
    def inner(xs):
        for x in xs:
            msg = check(x)
            if msg:
                return f"entries {msg}"
        return None
    return inner


def _non_empty(xs):
    return None if len(xs) else "must not be empty"


def _every(*checks):
    def inner(value):
        for check in checks:
            msg = check(value)
            if msg:
                return msg
        return None
    return inner


def _pair(xs):
    return None if len(xs) == 2 and xs[0] < xs[1] else "must be [low, high] with low < high"


COMMON = {
    "command": ("str", None, _one_of(*COMMANDS)),
    "out": ("str?", None, None),
    "workers": ("int?", None, _positive),
    "svg": ("bool", False, None),
    "png": ("bool", False, None),
}

SCHEMAS = {
    "disorder_spec": {
        "table": ("str?", None, _one_of(*TABLE_V)),
        "strength": ("float", 0.0, _non_negative),
        "seed": ("int", 0, _non_negative),
    },
    "chain": {
        "unit_cells": ("int", 4, _positive),
        "j_intra": ("float", 60.0, _non_negative),
        "j_inter": ("float", 20.0, _non_negative),
        "disorder": ("disorder_spec?", None, None),
    },
    "axis": {
        "start": ("float", 20.0, _positive),
        "stop": ("float", 120.0, _positive),
        "num": ("int", 11, _positive),
    },
    "grid": {
        "j_intra": ("axis", None, None),
        "j_inter": ("axis", None, None),
    },
    "quench": {
        "chain": ("chain", None, None),
        "initial_ratio": ("float", 0.0, _ratio),
        "window_s": ("float", 0.04, _positive),
        "step_s": ("float", 5e-5, _positive),
        "root_tol_s": ("float", 1e-7, _positive),
        "escalation": ("ints?", None, _every(_non_empty, _all(_positive))),
        "pgp_offset_rad": ("float", 0.0, None),
    },
    "disorder": {
        "chain": ("chain", None, None),
        "rows": ("strs?", None, _every(_non_empty, _all(_one_of(*TABLE_V)))),
        "strengths": ("floats", [0.0, 5.0, 10.0, 15.0], _every(_non_empty, _all(_non_negative))),
        "samples": ("int", 5, _positive),
        "seed": ("int", 0, _non_negative),
        "window_s": ("float", 0.04, _positive),
        "step_s": ("float", 5e-5, _positive),
        "root_tol_s": ("float", 1e-7, _positive),
    },
    "sweep": {
        "unit_cells": ("int", 40, _positive),
        "initial_ratio": ("float", 0.0, _ratio),
        "j_inter": ("float", 60.0, _positive),
        "window": ("float", 10.0, _positive),
        "bracket": ("floats", [0.5, 1.5], _pair),
        "half_width": ("float", 1e-4, _positive),
        "steps_per_window": ("int", 4000, _positive),
        "find_boundary": ("bool", True, None),
        "calibrate_windows": ("floats?", None, _every(_non_empty, _all(_positive))),
        "initial_ratios": ("floats?", None, _every(_non_empty, _all(_ratio))),
        "grid": ("grid?", None, None),
    },
    "mech": {
        "mode": ("str", "replica", _one_of("replica", "ringdown")),
        "bank": ("str", "beams-8", _one_of("beams-8")),
        "chain": ("chain", None, None),
        "couplings_hz": ("floats?", None, _all(_non_negative)),
        "duration_s": ("float", 0.04, _positive),
        "samples": ("int", 401, _positive),
        "dt_s": ("float?", None, _positive),
        "window_cycles": ("int", 50, _positive),
        "damping": ("bool", False, None),
        "uniform_gamma_per_s": ("float?", None, _positive),
    },
    "spectrum": {
        "chain": ("chain", None, None),
        "initial_ratio": ("float", 0.0, _ratio),
        "linewidth_hz": ("float", 9.0, _positive),
        "f_min_hz": ("float", -60.0, None),
        "f_max_hz": ("float", 60.0, None),
        "points": ("int", 1201, _positive),
    },
}


def _coerce(kind: str, value, where: str):
    optional = kind.endswith("?")
    kind = kind.rstrip("?")
    if value is None:
        if optional:
            return None
        if kind in SCHEMAS:
            return _resolve_section(kind, {}, where)
        raise ConfigError(f"{where}: value required")
    if kind in SCHEMAS:
        return _resolve_section(kind, value, where)
    scalar = {"int": int, "float": float, "bool": bool, "str": str}
    if kind in ("ints", "floats", "strs"):
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list")
        return [_coerce(kind[:-1], v, f"{where}[{k}]") for k, v in enumerate(value)]
    want = scalar[kind]
    if want is bool:
        ok = isinstance(value, bool)
    elif want is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif want is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, str)
    if not ok:
        raise ConfigError(f"{where}: expected {kind}, got {type(value).__name__}")
    return want(value)


def _resolve_section(name: str, data, where: str, schema=None) -> dict:
    schema = SCHEMAS[name] if schema is None else schema
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(data) - set(schema))
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}: unknown key")
    out = {}
    for key, (kind, default, check) in schema.items():
        path = f"{where}.{key}"
        value = _coerce(kind, data.get(key, default), path)
        if check is not None and value is not None:
            msg = check(value)
            if msg:
                raise ConfigError(f"{path}: {msg}")
        out[key] = value
    return out


def _cross_checks(cfg: dict):
    cmd = cfg["command"]
    if cmd in ("quench", "disorder") and cfg["step_s"] > cfg["window_s"]:
        raise ConfigError("config.step_s: must not exceed window_s")
    if cmd == "quench" and cfg["escalation"] is not None:
        sizes = cfg["escalation"]
        if sizes[0] != cfg["chain"]["unit_cells"] or sorted(sizes) != sizes:
            raise ConfigError("config.escalation: must be ascending and start at chain.unit_cells")
    if cmd == "spectrum" and cfg["f_max_hz"] <= cfg["f_min_hz"]:
        raise ConfigError("config.f_max_hz: must exceed f_min_hz")
    if cmd == "mech" and cfg["samples"] < 2:
        raise ConfigError("config.samples: need at least two output samples")


def resolve(data: dict) -> dict:
    """Validate a raw config document and return it with all defaults filled."""
    if not isinstance(data, dict):
        raise ConfigError("config: expected an object")
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"config.command: must be one of {', '.join(COMMANDS)}")
    schema = {**COMMON, **SCHEMAS[command]}
    cfg = _resolve_section(command, data, "config", schema)
    _cross_checks(cfg)
    return cfg


def merge(base: dict, override: dict) -> dict:
    """Recursive dict update; ``override`` wins, nested objects are merged."""
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def preset_names() -> list[str]:
    files = resources.files("sshdpt").joinpath("presets").iterdir()
    return sorted(p.name[:-5] for p in files if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = resources.files("sshdpt").joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(preset_names())})")
    return json.loads(path.read_text())


def load_file(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
