"""Frozen scenario sets behind the `figure` subcommand.

Each preset is a base scenario plus named curve patches, optional
difference comparisons against a reference curve, and (for fig4) a finer
grid on which only the death times are recomputed.
"""
from __future__ import annotations

import copy
import math

from gaussctl.config import ConfigError, ScenarioConfig, merge, parse_scenario

TMSV_R = math.log(math.sqrt(2.0) + 1.0) / 2.0

_TMSV = {"tmsv": {"r": TMSV_R}}
_F3 = {"normal_form": {"a": 4.5, "b": 3.5, "c_plus": 2.2, "c_minus": -3.5}}
_F5 = {"normal_form": {"a": 5.0, "b": 6.0, "c_plus": 5.2, "c_minus": -4.8}}
_SQ1 = [{"squeeze": 2.0, "mode": 1}]
_SQ2 = [{"squeeze": 2.0, "mode": 2}]
_SQ12 = _SQ1 + _SQ2
_LOW_NOISE = 1.000013
_MICROWAVE = {"gamma": "100 kHz", "chi_over_gamma1": 1.14769, "chi_over_gamma2": 1.02956}


def _squeezed_family(state, both_label="both-modes", mode2=False):
    curves = {
        "normal-form": {},
        "mode1-squeezed": {"state": {**state, "pre_ops": _SQ1}},
    }
    if mode2:
        curves["mode2-squeezed"] = {"state": {**state, "pre_ops": _SQ2}}
    curves[both_label] = {"state": {**state, "pre_ops": _SQ12}}
    return curves


def _initial(scope):
    return {"strategy": {"law": "negativity", "scope": scope, "schedule": "initial"}}


def _every(scope, law="negativity"):
    return {"strategy": {"law": law, "scope": scope, "schedule": "every-step"}}


PRESETS: dict[str, dict] = {
    "fig1-left": {
        "base": {"state": _TMSV, "baths": {"gamma": "100 kHz", "chi_over_gamma": 2.0},
                 "horizon": "6 us"},
        "curves": _squeezed_family(_TMSV),
    },
    "fig1-right": {
        "base": {"state": _TMSV, "baths": {"gamma": "100 kHz", "chi_over_gamma": _LOW_NOISE},
                 "horizon": "20 us", "landmarks": ["10 us"]},
        "curves": _squeezed_family(_TMSV),
        "comparisons": [{"reference": "normal-form", "quantity": "E_N",
                         "curves": ["mode1-squeezed", "both-modes"]}],
    },
    "fig2-left": {
        "base": {"state": _TMSV,
                 "baths": {"gamma": "100 kHz", "chi_over_gamma1": 1.0, "chi_over_gamma2": 2.0},
                 "horizon": "8 us"},
        "curves": _squeezed_family(_TMSV, mode2=True),
    },
    "fig2-right": {
        "base": {"state": _TMSV,
                 "baths": {"gamma1": "100 kHz", "gamma2": "10 kHz", "chi_over_gamma": _LOW_NOISE},
                 "horizon": "20 us"},
        "curves": _squeezed_family(_TMSV, mode2=True),
    },
    "fig3": {
        "base": {"state": _F3, "baths": {"gamma": "100 kHz", "chi_over_gamma": _LOW_NOISE},
                 "horizon": "100 us"},
        "curves": {
            "optimal-both": _initial("both"),
            "optimal-mode1": _initial("mode1"),
            "normal-form": {},
            "mode1-squeezed": {"state": {**_F3, "pre_ops": _SQ1}},
            "mode1-phase-squeezed": {"state": {**_F3, "pre_ops": [
                {"rotate": math.pi / 4, "mode": 1}, {"squeeze": 2.0, "mode": 1}]}},
        },
    },
    "fig4": {
        "base": {"state": _F3, "baths": _MICROWAVE, "horizon": "10 us", "dt": "2e-3 us"},
        "curves": {
            "initial-only": _initial("both"),
            "controls-2": {"strategy": {"law": "negativity", "scope": "both", "schedule": {"count": 2}}},
            "controls-4": {"strategy": {"law": "negativity", "scope": "both", "schedule": {"count": 4}}},
            "controls-10": {"strategy": {"law": "negativity", "scope": "both", "schedule": {"count": 10}}},
            "controls-100": {"strategy": {"law": "negativity", "scope": "both", "schedule": {"count": 100}}},
            "every-step": _every("both"),
        },
        "comparisons": [{"reference": "initial-only", "quantity": "E_N",
                         "curves": ["controls-2", "controls-4", "controls-10", "controls-100", "every-step"]}],
        "death_dt": "3e-4 us",
    },
    "fig5": {
        "base": {"state": _F5, "baths": _MICROWAVE, "horizon": "20 us", "dt": "1e-2 us"},
        "curves": {
            "no-control": {},
            "both-initial": _initial("both"),
            "both-every-step": _every("both"),
            "mode1-initial": _initial("mode1"),
            "mode1-every-step": _every("mode1"),
            "mode2-initial": _initial("mode2"),
            "mode2-every-step": _every("mode2"),
        },
        "comparisons": [{"reference": "no-control", "quantity": "E_N",
                         "curves": ["both-initial", "both-every-step", "mode1-initial",
                                    "mode1-every-step", "mode2-initial", "mode2-every-step"]}],
    },
    "fig6": {
        "base": {"state": _F3, "baths": {"gamma": "1 MHz", "chi_over_gamma": 2.0},
                 "horizon": "120 ns"},
        "curves": {
            "nu-law": _every("both", "negativity"),
            "sigma-law": _every("both", "sigma_tilde"),
        },
        "comparisons": [{"reference": "sigma-law", "quantity": "Sigma_tilde", "curves": ["nu-law"]}],
    },
}


def preset_names() -> list[str]:
    return list(PRESETS)


def preset_raw(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return copy.deepcopy(PRESETS[name])


def preset_scenarios(name: str, overrides: dict | None = None) -> dict[str, ScenarioConfig]:
    """Parsed curve scenarios of a preset, keyed by curve name."""
    spec = preset_raw(name)
    out = {}
    for curve, patch in spec["curves"].items():
        raw = merge(spec["base"], patch)
        raw["name"] = f"{name}_{curve}"
        out[curve] = parse_scenario(raw, overrides)
    return out
