"""Scenario runners that produce CSV trajectories and JSON summaries."""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from gaussctl import _settings
from gaussctl.config import (
    ConfigError,
    ScenarioConfig,
    baths_record,
    check_axis,
    merge,
    parse_scenario,
    parse_time,
    set_path,
)
from gaussctl.control import crossing_time, simulate
from gaussctl.core import OMEGA
from gaussctl.dynamics import Trajectory
from gaussctl.errors import CoefficientSignError
from gaussctl.presets import preset_raw, preset_scenarios

COLUMNS = ("t_us", "E_N", "nu_tilde_minus", "Sigma_tilde", "det_sigma", "delta_tilde",
           "controls_applied_flag")
QUANTITIES = {"E_N": "log_negativity", "nu_tilde_minus": "nu_tilde_minus",
              "Sigma_tilde": "sigma_tilde", "det_sigma": "det_sigma", "delta_tilde": "delta_tilde"}


class InvariantBreach(RuntimeError):
    """A physical invariant failed along a computed trajectory."""


def _fmt(x) -> str:
    return format(float(x), ".17g")


def min_symplectic_eigenvalues(states: np.ndarray) -> np.ndarray:
    """Smallest symplectic eigenvalue of each matrix in a stack (NaN if not positive definite)."""
    out = np.full(len(states), np.nan)
    ok = np.all(np.isfinite(states), axis=(1, 2))
    try:
        low = np.linalg.cholesky(states[ok])
    except np.linalg.LinAlgError:
        return out
    herm = 1j * (np.swapaxes(low, -1, -2) @ OMEGA @ low)
    out[ok] = np.abs(np.linalg.eigvalsh(herm)).min(axis=-1)
    return out


def check_trajectory(traj: Trajectory, name: str = "trajectory") -> None:
    """Raise :class:`InvariantBreach` if any recorded state is unphysical."""
    nu = min_symplectic_eigenvalues(traj.states)
    bad = ~(nu >= 1.0 - _settings.PHYSICALITY_TOL * np.maximum(1.0, np.abs(traj.states).max(axis=(1, 2))))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise InvariantBreach(f"{name}: state at t = {traj.times[k]:.6g} us violates the uncertainty relation")


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trajectory: Trajectory
    death_time: float | None
    warnings: list[str] = field(default_factory=list)

    def column(self, quantity: str) -> np.ndarray:
        if quantity not in QUANTITIES:
            raise ConfigError(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")
        return getattr(self.trajectory, QUANTITIES[quantity])

    def landmark_values(self) -> dict[str, float]:
        cfg, traj = self.config, self.trajectory
        points = (0.0, cfg.horizon / 2, cfg.horizon) + tuple(cfg.landmarks)
        en = traj.log_negativity
        return {_fmt(t): float(np.interp(t, traj.times, en)) for t in points}

    def summary(self) -> dict:
        cfg = self.config
        return {
            "name": cfg.name,
            "baths": baths_record(cfg.baths),
            "state": {"kind": cfg.state.kind, "params": list(cfg.state.params),
                      "pre_ops": [list(op) for op in cfg.state.pre_ops]},
            "strategy": {"law": cfg.strategy.law, "scope": cfg.strategy.scope,
                         "schedule": cfg.strategy.schedule if isinstance(cfg.strategy.schedule, str)
                         else list(cfg.strategy.schedule)},
            "horizon_us": cfg.horizon,
            "dt_us": cfg.dt,
            "samples": len(self.trajectory),
            "death_time_us": self.death_time,
            "horizon_exhausted": self.death_time is None,
            "E_N_at_us": self.landmark_values(),
            "controls_applied": int(self.trajectory.control_mask.sum()),
            "warnings": self.warnings,
        }

    def csv_text(self) -> str:
        traj = self.trajectory
        cols = (traj.times, traj.log_negativity, traj.nu_tilde_minus, traj.sigma_tilde,
                traj.det_sigma, traj.delta_tilde)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for k in range(len(traj)):
            writer.writerow([_fmt(c[k]) for c in cols] + [int(traj.control_mask[k])])
        return buf.getvalue()


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Simulate one scenario and check physicality along the way."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            traj = simulate(cfg.state.build(), cfg.baths, cfg.strategy, cfg.horizon, cfg.dt)
        except CoefficientSignError as exc:
            raise InvariantBreach(f"{cfg.name}: {exc}") from None
    check_trajectory(traj, cfg.name)
    death = crossing_time(traj, cfg.baths)
    return ScenarioResult(cfg, traj, death, [str(w.message) for w in caught])


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def write_json(path: Path, data) -> None:
    _write(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_scenario(result: ScenarioResult, out: Path) -> Path:
    csv_path = out / (result.config.output or f"{result.config.name}.csv")
    _write(csv_path, result.csv_text())
    write_json(csv_path.with_suffix(".summary.json"), result.summary())
    return csv_path


# ----------------------------------------------------------------- compare


@dataclass
class Comparison:
    reference: str
    quantity: str
    times: np.ndarray
    differences: dict[str, np.ndarray]
    death_times: dict[str, float | None]

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.differences)
        writer.writerow(["t_us"] + [f"{n}-{self.reference}" for n in names])
        for k, t in enumerate(self.times):
            writer.writerow([_fmt(t)] + [_fmt(self.differences[n][k]) for n in names])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "reference": self.reference,
            "quantity": self.quantity,
            "death_time_us": self.death_times,
            "difference_min": {n: float(np.min(d)) for n, d in self.differences.items()},
            "difference_max": {n: float(np.max(d)) for n, d in self.differences.items()},
        }


def run_comparison(results: dict[str, ScenarioResult], reference: str,
                   curves: Sequence[str] | None = None, quantity: str = "E_N") -> Comparison:
    """Pointwise ``curve - reference`` differences on a shared grid."""
    if reference not in results:
        raise ConfigError(f"reference curve {reference!r} not among {sorted(results)}")
    curves = [n for n in results if n != reference] if curves is None else list(curves)
    ref = results[reference]
    base = ref.column(quantity)
    diffs = {}
    for name in curves:
        if name not in results:
            raise ConfigError(f"curve {name!r} not among {sorted(results)}")
        res = results[name]
        if len(res.trajectory) != len(ref.trajectory) or not np.array_equal(res.trajectory.times, ref.trajectory.times):
            raise ConfigError(f"curve {name!r} and reference {reference!r} have different time grids")
        diffs[name] = res.column(quantity) - base
    deaths = {n: results[n].death_time for n in [reference] + curves}
    return Comparison(reference, quantity, ref.trajectory.times, diffs, deaths)


def comparison_from_config(raw: dict, overrides: dict | None = None) -> tuple[dict[str, ScenarioResult], Comparison]:
    """``{base: scenario, curves: {name: patch}, reference: name, quantity: ...}``."""
    allowed = {"base", "curves", "reference", "quantity"}
    extra = set(raw) - allowed
    if extra:
        raise ConfigError(f"compare config: unknown keys {sorted(extra)}")
    if "curves" not in raw or "reference" not in raw:
        raise ConfigError("compare config needs curves and reference")
    base = raw.get("base") or {}
    if not isinstance(raw["curves"], dict) or not raw["curves"]:
        raise ConfigError("compare config: curves must be a non-empty mapping")
    results = {}
    for name, patch in raw["curves"].items():
        cfg = parse_scenario(merge(base, {"name": str(name), **(patch or {})}), overrides)
        results[str(name)] = run_scenario(cfg)
    cmp = run_comparison(results, str(raw["reference"]), quantity=raw.get("quantity", "E_N"))
    return results, cmp


# -------------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("value", "death_time_us", "E_N_0", "E_N_mid", "E_N_end")


def sweep(template: dict, axis: str, values: Sequence, overrides: dict | None = None) -> list[dict]:
    """One row per value of the dotted config ``axis``."""
    check_axis(template, axis)
    rows = []
    for value in values:
        cfg = parse_scenario(set_path(template, axis, value), overrides)
        res = run_scenario(cfg)
        marks = list(res.landmark_values().values())
        rows.append({"value": value, "death_time_us": res.death_time,
                     "E_N_0": marks[0], "E_N_mid": marks[1], "E_N_end": marks[2]})
    return rows


def parse_sweep_values(text: str) -> list:
    """Comma-separated values, each read as a YAML scalar (``1.5`` or ``10 us``)."""
    if not text.strip():
        return []
    out = []
    for item in text.split(","):
        try:
            out.append(yaml.safe_load(item.strip()))
        except yaml.YAMLError:
            raise ConfigError(f"cannot parse sweep value {item!r}") from None
    return out


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([row["value"], "" if row["death_time_us"] is None else _fmt(row["death_time_us"])]
                        + [_fmt(row[c]) for c in SWEEP_COLUMNS[2:]])
    return buf.getvalue()


# ------------------------------------------------------------------ figures


def run_figure(name: str, overrides: dict | None = None) -> dict:
    """All curves of a preset, their comparisons and (if configured) fine-grid death times."""
    spec = preset_raw(name)
    scenarios = preset_scenarios(name, overrides)
    results = {curve: run_scenario(cfg) for curve, cfg in scenarios.items()}
    comparisons = [run_comparison(results, c["reference"], c["curves"], c.get("quantity", "E_N"))
                   for c in spec.get("comparisons", [])]
    fine = {}
    if "death_dt" in spec and not (overrides or {}).get("dt"):
        fine_over = dict(overrides or {}, dt=spec["death_dt"])
        for curve, cfg in preset_scenarios(name, fine_over).items():
            fine[curve] = run_scenario(cfg).death_time
    return {"name": name, "results": results, "comparisons": comparisons, "fine_death_times": fine}


def write_figure(fig: dict, out: Path) -> dict:
    summary = {"preset": fig["name"], "curves": {}, "comparisons": []}
    for curve, res in fig["results"].items():
        write_scenario(res, out)
        summary["curves"][curve] = {"death_time_us": res.death_time,
                                    "E_N_at_us": res.landmark_values(),
                                    "warnings": res.warnings}
    for k, cmp in enumerate(fig["comparisons"]):
        path = out / f"{fig['name']}_diff_{cmp.quantity}_vs_{cmp.reference}.csv"
        _write(path, cmp.csv_text())
        summary["comparisons"].append({"file": path.name, **cmp.summary()})
    if fig["fine_death_times"]:
        summary["fine_grid_death_time_us"] = fig["fine_death_times"]
    write_json(out / f"{fig['name']}_summary.json", summary)
    return summary


def time_override(value: str | None, what: str) -> str | None:
    """Validate a CLI time override early; returns it unchanged for the config layer."""
    if value is not None:
        parse_time(value, what)
    return value
