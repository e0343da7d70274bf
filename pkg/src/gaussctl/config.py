"""Scenario configuration: strict YAML parsing with explicit physical units.

Times are stored in microseconds and rates in 1/us.  Dimensioned values
must be written as strings with a unit (``"100 kHz"``, ``"10 us"``); bare
numbers are rejected for them.  Dimensionless values (ratios, occupations,
squeezing factors, angles in radians) are plain numbers.
"""
from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from gaussctl.control import ControlStrategy
from gaussctl.core import (
    CovarianceMatrix,
    SymplecticTransform,
    apply_symplectic,
    check_physical,
    make_from_normal_form,
    make_two_mode_squeezed,
)
from gaussctl.dynamics import BathParams, bath_from_temperature
from gaussctl.errors import GaussianError


class ConfigError(GaussianError):
    """Malformed or inconsistent scenario configuration."""


_TIME_UNITS = {"s": 1e6, "ms": 1e3, "us": 1.0, "µs": 1.0, "μs": 1.0, "ns": 1e-3, "ps": 1e-6}
_RATE_UNITS = {"Hz": 1e-6, "kHz": 1e-3, "MHz": 1.0, "GHz": 1e3,
               "/s": 1e-6, "/ms": 1e-3, "/us": 1.0, "/ns": 1e3}
_ANGULAR_UNITS = {"rad/s": 1.0, "krad/s": 1e3, "Mrad/s": 1e6, "Grad/s": 1e9, "Trad/s": 1e12}
_TEMPERATURE_UNITS = {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\d\s].*?)\s*$")


def _quantity(value: Any, units: dict[str, float], what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, str):
        raise ConfigError(f"{what}: expected a number with a unit, got {value!r}")
    m = _QUANTITY.match(value)
    if not m or m.group(2) not in units:
        raise ConfigError(f"{what}: cannot parse {value!r}; units allowed: {', '.join(units)}")
    x = float(m.group(1)) * units[m.group(2)]
    if not math.isfinite(x):
        raise ConfigError(f"{what}: value must be finite")
    return x


def parse_time(value, what="time") -> float:
    """Duration in us."""
    return _quantity(value, _TIME_UNITS, what)


def parse_rate(value, what="rate") -> float:
    """Rate in 1/us (Hz read as events per second)."""
    return _quantity(value, _RATE_UNITS, what)


def parse_angular_frequency(value, what="omega") -> float:
    """Angular frequency in rad/s."""
    return _quantity(value, _ANGULAR_UNITS, what)


def parse_temperature(value, what="temperature") -> float:
    return _quantity(value, _TEMPERATURE_UNITS, what)


def _number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{what}: expected a plain number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(f"{what}: value must be finite")
    return x


def _mapping(raw, what: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{what}: expected a mapping, got {type(raw).__name__}")
    return raw


def _only(raw: dict, allowed: set[str], what: str):
    extra = set(raw) - allowed
    if extra:
        raise ConfigError(f"{what}: unknown keys {sorted(extra)}")


# ------------------------------------------------------------------- state


@dataclass(frozen=True)
class StateSpec:
    """Initial state: a normal form or TMSV, then local pre-operations."""

    kind: str
    params: tuple[float, ...]
    pre_ops: tuple[tuple[str, int, float], ...] = ()

    def build(self) -> CovarianceMatrix:
        if self.kind == "normal_form":
            sigma = make_from_normal_form(*self.params)
        else:
            sigma = make_two_mode_squeezed(*self.params)
        for op, mode, value in self.pre_ops:
            if op == "squeeze":
                s = SymplecticTransform.squeeze(value, mode)
            else:
                s = SymplecticTransform.rotation(value, mode)
            sigma = apply_symplectic(sigma, s)
        return check_physical(sigma)


def parse_state(raw) -> StateSpec:
    raw = _mapping(raw, "state")
    _only(raw, {"normal_form", "tmsv", "pre_ops"}, "state")
    forms = [k for k in ("normal_form", "tmsv") if k in raw]
    if len(forms) != 1:
        raise ConfigError("state: give exactly one of normal_form, tmsv")
    if forms[0] == "normal_form":
        nf = _mapping(raw["normal_form"], "state.normal_form")
        _only(nf, {"a", "b", "c_plus", "c_minus"}, "state.normal_form")
        try:
            params = tuple(_number(nf[k], f"state.normal_form.{k}") for k in ("a", "b", "c_plus", "c_minus"))
        except KeyError as exc:
            raise ConfigError(f"state.normal_form: missing {exc.args[0]}") from None
    else:
        tm = _mapping(raw["tmsv"], "state.tmsv")
        _only(tm, {"r"}, "state.tmsv")
        if "r" not in tm:
            raise ConfigError("state.tmsv: missing r")
        params = (_number(tm["r"], "state.tmsv.r"),)
        if params[0] < 0:
            raise ConfigError("state.tmsv.r must be non-negative")
    ops = []
    for k, op in enumerate(raw.get("pre_ops") or []):
        what = f"state.pre_ops[{k}]"
        op = _mapping(op, what)
        kinds = [name for name in ("squeeze", "rotate") if name in op]
        if len(kinds) != 1:
            raise ConfigError(f"{what}: give exactly one of squeeze, rotate")
        _only(op, {kinds[0], "mode"}, what)
        mode = op.get("mode")
        if mode not in (1, 2):
            raise ConfigError(f"{what}: mode must be 1 or 2")
        value = _number(op[kinds[0]], f"{what}.{kinds[0]}")
        if kinds[0] == "squeeze" and value <= 0:
            raise ConfigError(f"{what}: squeeze factor must be positive")
        ops.append((kinds[0], mode, value))
    return StateSpec(forms[0], params, tuple(ops))


# ------------------------------------------------------------------- baths


def _pair(raw: dict, key: str, parse, what: str):
    """Read ``key`` (shared) or ``key1``/``key2``."""
    if key in raw:
        if f"{key}1" in raw or f"{key}2" in raw:
            raise ConfigError(f"baths: {key} given both shared and per mode")
        v = parse(raw[key], f"{what}.{key}")
        return v, v
    if f"{key}1" in raw and f"{key}2" in raw:
        return parse(raw[f"{key}1"], f"{what}.{key}1"), parse(raw[f"{key}2"], f"{what}.{key}2")
    return None


def parse_baths(raw) -> BathParams:
    raw = _mapping(raw, "baths")
    keys = {"gamma", "gamma1", "gamma2", "chi_over_gamma", "chi_over_gamma1", "chi_over_gamma2",
            "occupation", "occupation1", "occupation2", "temperature", "omega1", "omega2"}
    _only(raw, keys, "baths")
    gammas = _pair(raw, "gamma", parse_rate, "baths")
    if gammas is None:
        raise ConfigError("baths: need gamma or gamma1 and gamma2")
    forms = {
        "chi_over_gamma": _pair(raw, "chi_over_gamma", _number, "baths"),
        "occupation": _pair(raw, "occupation", _number, "baths"),
        "temperature": "temperature" in raw or "omega1" in raw or "omega2" in raw,
    }
    present = [k for k, v in forms.items() if v]
    if len(present) != 1:
        raise ConfigError("baths: give exactly one of chi_over_gamma, occupation, temperature+omega")
    try:
        if present[0] == "chi_over_gamma":
            return BathParams.from_ratios(*gammas, *forms["chi_over_gamma"])
        if present[0] == "occupation":
            return BathParams.from_occupations(*gammas, *forms["occupation"])
        if not ("temperature" in raw and "omega1" in raw and "omega2" in raw):
            raise ConfigError("baths: temperature form needs temperature, omega1 and omega2")
        temp = parse_temperature(raw["temperature"], "baths.temperature")
        m1 = bath_from_temperature(gammas[0], parse_angular_frequency(raw["omega1"], "baths.omega1"), temp)
        m2 = bath_from_temperature(gammas[1], parse_angular_frequency(raw["omega2"], "baths.omega2"), temp)
        return BathParams.from_modes(m1, m2)
    except ConfigError:
        raise
    except GaussianError as exc:
        raise ConfigError(f"baths: {exc}") from None


# ---------------------------------------------------------------- strategy


def parse_strategy(raw, horizon: float) -> ControlStrategy:
    if raw is None:
        return ControlStrategy.none()
    raw = _mapping(raw, "strategy")
    _only(raw, {"law", "scope", "schedule"}, "strategy")
    law = raw.get("law", "negativity")
    scope = raw.get("scope", "both")
    sched = raw.get("schedule", "initial")
    try:
        if isinstance(sched, dict):
            _only(sched, {"times", "count"}, "strategy.schedule")
            if ("times" in sched) == ("count" in sched):
                raise ConfigError("strategy.schedule: give exactly one of times, count")
            if "count" in sched:
                count = sched["count"]
                if isinstance(count, bool) or not isinstance(count, int) or count < 1:
                    raise ConfigError("strategy.schedule.count must be a positive integer")
                return ControlStrategy.evenly_spaced(count, horizon, law, scope)
            times = tuple(parse_time(t, "strategy.schedule.times") for t in sched["times"])
            if times and times[-1] > horizon * (1 + 1e-12):
                raise ConfigError("strategy.schedule.times: control time beyond horizon")
            return ControlStrategy(law, scope, times)
        return ControlStrategy(law, scope, sched)
    except ConfigError:
        raise
    except GaussianError as exc:
        raise ConfigError(f"strategy: {exc}") from None


# ----------------------------------------------------------------- scenario


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    state: StateSpec
    baths: BathParams
    strategy: ControlStrategy
    horizon: float
    dt: float
    output: str | None = None
    landmarks: tuple[float, ...] = ()
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


SCENARIO_KEYS = {"name", "state", "baths", "strategy", "horizon", "dt", "output", "landmarks"}


def parse_scenario(raw, overrides: dict | None = None) -> ScenarioConfig:
    """Validate a scenario mapping; ``overrides`` (horizon/dt strings) win over the file."""
    raw = copy.deepcopy(_mapping(raw, "scenario"))
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    _only(raw, SCENARIO_KEYS, "scenario")
    for key in ("state", "baths", "horizon"):
        if key not in raw:
            raise ConfigError(f"scenario: missing {key}")
    horizon = parse_time(raw["horizon"], "horizon")
    if horizon <= 0:
        raise ConfigError("horizon must be positive")
    dt = parse_time(raw["dt"], "dt") if "dt" in raw else horizon / 2000
    if dt <= 0:
        raise ConfigError("dt must be positive")
    if dt > horizon:
        raise ConfigError("dt exceeds the horizon")
    landmarks = tuple(parse_time(t, "landmarks") for t in raw.get("landmarks") or ())
    name = str(raw.get("name", "scenario"))
    if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError(f"name {name!r}: use letters, digits, '-', '_' or '.'")
    try:
        state = parse_state(raw["state"])
        state.build()
    except ConfigError:
        raise
    except GaussianError as exc:
        raise ConfigError(f"state: {exc}") from None
    return ScenarioConfig(
        name=name,
        state=state,
        baths=parse_baths(raw["baths"]),
        strategy=parse_strategy(raw.get("strategy"), horizon),
        horizon=horizon,
        dt=dt,
        output=raw.get("output"),
        landmarks=landmarks,
        raw=raw,
    )


def merge(base: dict, patch: dict) -> dict:
    """Recursive dict merge; ``patch`` wins, lists are replaced wholesale."""
    out = copy.deepcopy(base)
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def check_axis(raw: dict, path: str):
    """Value at dotted ``path``; it must exist and be a number or a unit string."""
    node = raw
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"unknown sweep axis {path!r}")
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float, str)):
        raise ConfigError(f"sweep axis {path!r} is not a numeric leaf")
    if isinstance(node, str) and not _QUANTITY.match(node):
        raise ConfigError(f"sweep axis {path!r} is not a numeric leaf")
    return node


def set_path(raw: dict, path: str, value) -> dict:
    """Copy of ``raw`` with the numeric leaf at dotted ``path`` replaced."""
    check_axis(raw, path)
    out = copy.deepcopy(raw)
    *parents, leaf = path.split(".")
    node = out
    for part in parents:
        node = node[part]
    node[leaf] = value
    return out


def load_yaml(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    return _mapping(data, str(path))


def baths_record(baths: BathParams) -> dict:
    return {"gamma1_per_us": baths.gamma1, "gamma2_per_us": baths.gamma2,
            "chi1_over_gamma1": baths.ratio1, "chi2_over_gamma2": baths.ratio2}


def state_matrix(cfg: ScenarioConfig) -> np.ndarray:
    return cfg.state.build().matrix
