"""Scenario files and presets.

A scenario is a flat YAML (or JSON) mapping. Keys missing from the file come
from the preset (``case1`` unless the file names another with ``preset``);
command-line flags override both.

Example::

    preset: case2
    protocols: [meecda, eecda-approx]
    seeds: 20            # or an explicit list: [0, 5, 9]
    max_rounds: 60000
    out: results/case2
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from hetwsn.engine import DEFAULT_MAX_ROUNDS, SimulationConfig
from hetwsn.heterogeneity import HeterogeneityConfig
from hetwsn.protocols import MAX_SLEEP_ROUNDS, ProtocolKind
from hetwsn.radio import RadioParams


class ScenarioError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


_BASE = {
    "n": 100, "m": 0.5, "m0": 0.4, "alpha": 1.0, "beta": 2.0, "e0": 0.5, "p_opt": 0.1,
    "e_elec": 5e-9, "eps_fs": 10e-12, "eps_mp": 0.0013e-12, "e_da": 5e-9,
    "d0_override": None, "packet_bits": 4000,
    "area_side": 100.0, "bs_pos": [50.0, 50.0], "max_rounds": DEFAULT_MAX_ROUNDS,
    "seed": 0, "protocol": "meecda", "max_sleep_rounds": MAX_SLEEP_ROUNDS,
    "seeds": [0], "protocols": ["meecda", "eecda-approx"], "out": "results",
}

PRESETS: dict[str, dict[str, Any]] = {
    "case1": {"alpha": 1.0, "beta": 2.0},
    "case2": {"alpha": 1.5, "beta": 3.0},
    # the d70 presets pin the crossover at 70 m instead of sqrt(eps_fs/eps_mp)
    "case1-d70": {"alpha": 1.0, "beta": 2.0, "d0_override": 70.0},
    "case2-d70": {"alpha": 1.5, "beta": 3.0, "d0_override": 70.0},
}

KEYS = frozenset(_BASE) | {"preset"}

_INT_KEYS = {"n", "packet_bits", "max_rounds", "seed", "max_sleep_rounds"}
_FLOAT_KEYS = {"m", "m0", "alpha", "beta", "e0", "p_opt", "e_elec", "eps_fs", "eps_mp", "e_da", "area_side"}


@dataclass
class Scenario:
    base: SimulationConfig
    seeds: list[int]
    protocols: list[ProtocolKind]
    out: Path

    def config(self, protocol: ProtocolKind, seed: int) -> SimulationConfig:
        from dataclasses import replace
        return replace(self.base, protocol=protocol, seed=seed)


def load_file(path) -> dict[str, Any]:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ScenarioError("config", f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError("config", f"{path} is not valid YAML/JSON: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ScenarioError("config", f"{path} must hold a mapping at the top level")
    return data


def _check_number(key: str, value, integer: bool):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(key, f"expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ScenarioError(key, f"expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ScenarioError(key, f"expected a finite number, got {value!r}")
    return float(value)


def _seeds(value) -> list[int]:
    if isinstance(value, int) and not isinstance(value, bool):
        if value < 1:
            raise ScenarioError("seeds", f"need at least one seed, got {value!r}")
        return list(range(value))
    if isinstance(value, list) and value:
        return [_check_number("seeds", v, integer=True) for v in value]
    raise ScenarioError("seeds", f"expected a count or a non-empty list, got {value!r}")


def resolve(file_values: Optional[Mapping[str, Any]] = None,
            overrides: Optional[Mapping[str, Any]] = None,
            preset: Optional[str] = None) -> Scenario:
    """Merge preset defaults < file values < overrides into a :class:`Scenario`.

    ``overrides`` entries that are ``None`` are ignored. The preset is taken
    from ``preset`` (a flag) if given, else the file's ``preset`` key, else
    ``case1``.
    """
    file_values = dict(file_values or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    for source in (file_values, overrides):
        for key in source:
            if key not in KEYS:
                raise ScenarioError(key, "unknown key")

    preset_name = preset or overrides.pop("preset", None) or file_values.get("preset") or "case1"
    if preset_name not in PRESETS:
        raise ScenarioError("preset", f"unknown preset {preset_name!r} (choose from {', '.join(PRESETS)})")
    values = dict(_BASE)
    values.update(PRESETS[preset_name])
    values.update({k: v for k, v in file_values.items() if k != "preset"})
    values.update(overrides)

    for key in _INT_KEYS:
        values[key] = _check_number(key, values[key], integer=True)
    for key in _FLOAT_KEYS:
        values[key] = _check_number(key, values[key], integer=False)
    if values["d0_override"] is not None:
        values["d0_override"] = _check_number("d0_override", values["d0_override"], integer=False)
    bs = values["bs_pos"]
    if not (isinstance(bs, (list, tuple)) and len(bs) == 2):
        raise ScenarioError("bs_pos", f"expected [x, y], got {bs!r}")
    bs = tuple(_check_number("bs_pos", v, integer=False) for v in bs)

    def build(key_group, factory, keys):
        try:
            return factory(**{k: values[k] for k in keys})
        except ValueError as exc:
            name = str(exc).split()[0]
            raise ScenarioError(name if name in KEYS else key_group, str(exc)) from None

    het = build("heterogeneity", HeterogeneityConfig, ("n", "m", "m0", "alpha", "beta", "e0", "p_opt"))
    radio = build("radio", RadioParams, ("e_elec", "eps_fs", "eps_mp", "e_da", "d0_override", "packet_bits"))
    try:
        protocol = ProtocolKind.parse(str(values["protocol"]))
    except ValueError as exc:
        raise ScenarioError("protocol", str(exc)) from None
    protocols_raw = values["protocols"]
    if not isinstance(protocols_raw, list):
        raise ScenarioError("protocols", f"expected a list, got {protocols_raw!r}")
    try:
        protocols = [ProtocolKind.parse(str(p)) for p in protocols_raw]
    except ValueError as exc:
        raise ScenarioError("protocols", str(exc)) from None

    try:
        base = SimulationConfig(het=het, radio=radio, area_side=values["area_side"], bs_pos=bs,
                                max_rounds=values["max_rounds"], seed=values["seed"], protocol=protocol,
                                max_sleep_rounds=values["max_sleep_rounds"])
    except ValueError as exc:
        name = str(exc).split()[0]
        raise ScenarioError(name if name in KEYS else "simulation", str(exc)) from None
    return Scenario(base=base, seeds=_seeds(values["seeds"]), protocols=protocols, out=Path(str(values["out"])))
