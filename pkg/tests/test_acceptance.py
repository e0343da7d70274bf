"""Acceptance criteria, one pass/fail line each.

Run under pytest (lines are repeated in the terminal summary) or directly:

    python3 tests/test_acceptance.py
"""
from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gaussctl.control import ControlStrategy, death_time, simulate
from gaussctl.core import (
    apply_symplectic,
    is_physical,
    log_negativity,
    make_from_normal_form,
    make_two_mode_squeezed,
    normal_form,
    same_normal_form,
)
from gaussctl.dynamics import BathParams, sample_free
from gaussctl.experiments import check_trajectory, run_figure
from gaussctl.oracle import (
    random_baths,
    random_entangled_state,
    random_local_symplectic,
    run_verification,
)

TMSV_R = math.log(math.sqrt(2.0) + 1.0) / 2.0
F3 = (4.5, 3.5, 2.2, -3.5)
SEED = 20240607

LINES: list[str] = []


def _record(label: str, ok: bool, detail: str, elapsed: float | None = None) -> bool:
    tail = "" if elapsed is None else f" [{elapsed:.2f} s]"
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}{tail}"
    LINES.append(line)
    print(line)
    return ok


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _within(x, target, tol):
    return x is not None and abs(x - target) <= tol


# ------------------------------------------------------------------ 1 and 2


def criterion_1() -> list[bool]:
    baths = BathParams.symmetric(0.1, 2.0)
    tmsv = make_two_mode_squeezed(TMSV_R)
    with _Timer() as t:
        t_nf = death_time(tmsv, baths, ControlStrategy.none(), 6.0)
        one = apply_symplectic(tmsv, np.diag([2.0, 0.5, 1.0, 1.0]))
        both = apply_symplectic(tmsv, np.diag([2.0, 0.5, 2.0, 0.5]))
        t_one = death_time(one, baths, ControlStrategy.none(), 6.0)
        t_both = death_time(both, baths, ControlStrategy.none(), 6.0)
    fast = t.elapsed < 1.0
    a = _record("1a", _within(t_nf, 4.611, 0.005) and fast,
                f"normal-form death {t_nf:.4f} us (want 4.611 +- 0.005)", t.elapsed)
    b = _record("1b", _within(t_nf - t_one, 2.0, 0.5) and fast,
                f"one-mode pre-squeezed dies {t_nf - t_one:.3f} us earlier (want 2 +- 0.5)", t.elapsed)
    _record("1b companion", _within(t_nf - t_both, 2.0, 0.5),
            f"both-mode pre-squeezed dies {t_nf - t_both:.3f} us earlier (informational)")
    return [a, b]


def criterion_2() -> list[bool]:
    baths = BathParams.symmetric(0.1, 1.000013)
    tmsv = make_two_mode_squeezed(TMSV_R)
    free = ControlStrategy.none()
    with _Timer() as t:
        states = {
            "normal": tmsv,
            "one": apply_symplectic(tmsv, np.diag([2.0, 0.5, 1.0, 1.0])),
            "both": apply_symplectic(tmsv, np.diag([2.0, 0.5, 2.0, 0.5])),
        }
        en = {k: simulate(s, baths, free, 10.0, 0.005).log_negativity[-1] for k, s in states.items()}
    ok = _record("2", _within(en["normal"] - en["one"], 0.22, 0.03) and t.elapsed < 1.0,
                 f"E_N gap at 10 us vs one-mode squeezed {en['normal'] - en['one']:.4f} ebits (want 0.22 +- 0.03)",
                 t.elapsed)
    _record("2 companion", _within(en["normal"] - en["both"], 0.22, 0.03),
            f"E_N gap at 10 us vs both-mode squeezed {en['normal'] - en['both']:.4f} ebits (informational)")
    return [ok]


# ---------------------------------------------------------------------- 3


def criterion_3() -> list[bool]:
    with _Timer() as t:
        fig = run_figure("fig3")
    deaths = {k: r.death_time for k, r in fig["results"].items()}
    fast = t.elapsed < 5.0
    worst_name = min(deaths, key=lambda k: math.inf if deaths[k] is None else deaths[k])
    worst, best = deaths[worst_name], deaths["optimal-both"]
    a = _record("3a", _within(worst, 7.0, 0.15 * 7.0) and fast,
                f"worst-prepared curve ({worst_name}) dies at {worst:.3f} us (want 7 +- 15%)", t.elapsed)
    b = _record("3b", _within(best, 90.0, 0.15 * 90.0) and fast,
                f"optimal both-modes curve dies at {best:.2f} us (want 90 +- 15%)", t.elapsed)
    _record("3a companion", _within(deaths["normal-form"], 7.0, 1.05),
            f"normal-form curve dies at {deaths['normal-form']:.3f} us (informational)")
    return [a, b]


# ---------------------------------------------------------------------- 4


def criterion_4(n_states: int = 50) -> list[bool]:
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    with _Timer() as t:
        for _ in range(n_states):
            sigma, baths = random_entangled_state(rng), random_baths(rng, symmetric=True)
            horizon, dt = 5.0 / baths.gamma1, 1e-3 / baths.gamma1
            once = simulate(sigma, baths, ControlStrategy("negativity", "both", "initial"), horizon, dt)
            every = simulate(sigma, baths, ControlStrategy("negativity", "both", "every-step"), horizon, dt)
            worst = max(worst, float(np.abs(once.log_negativity - every.log_negativity).max()))
    ok = _record("4", worst < 1e-9 and t.elapsed < 30.0,
                 f"{n_states} symmetric states, max |E_N(initial) - E_N(every-step)| = {worst:.2e} (want < 1e-9)",
                 t.elapsed)
    return [ok]


# ------------------------------------------------------------------ 5 and 6


def criterion_5(n_states: int = 100) -> list[bool]:
    with _Timer() as t:
        rep = run_verification(n_states=n_states, n_derivative=0, seed=SEED)
    c = rep["control"]
    z_max, gap_max = c["z_error"]["max"], c["objective_gap"]["max"]
    ok = _record("5", z_max < 1e-3 and gap_max <= 1e-6 and c["coefficient_sign_errors"] == 0 and t.elapsed < 300,
                 f"{n_states} states, max z error {z_max:.2e} (want < 1e-3), "
                 f"max analytic - numeric {gap_max:.2e} (want <= 1e-6)", t.elapsed)
    return [ok]


def criterion_6(n_instances: int = 200) -> list[bool]:
    with _Timer() as t:
        rep = run_verification(n_states=0, n_derivative=n_instances, seed=SEED)
    worst = max(v["max"] for v in rep["derivatives"].values())
    names = ", ".join(sorted(rep["derivatives"]))
    ok = _record("6", worst < 1e-4 and t.elapsed < 30.0,
                 f"{n_instances} instances ({names}), max relative residual {worst:.2e} (want < 1e-4)", t.elapsed)
    return [ok]


# ---------------------------------------------------------------------- 7


def criterion_7() -> list[bool]:
    with _Timer() as t:
        fig = run_figure("fig6")
    nu, sig = fig["results"]["nu-law"].death_time, fig["results"]["sigma-law"].death_time
    gap = (nu - sig) / nu
    ok = _record("7", nu >= sig and gap < 1e-3 and t.elapsed < 10.0,
                 f"nu-law death {1e3 * nu:.3f} ns, sigma-law {1e3 * sig:.3f} ns, relative gap {gap:.2e} (want >= 0, < 1e-3)",
                 t.elapsed)
    return [ok]


# ---------------------------------------------------------------------- 8


def criterion_8(n: int = 40) -> list[bool]:
    rng = np.random.default_rng(SEED + 8)
    strategies = [ControlStrategy.none(), ControlStrategy("negativity", "both", "every-step"),
                  ControlStrategy("negativity", "mode1", "initial"), ControlStrategy("sigma_tilde", "both", "initial")]
    results = {}
    with _Timer() as t:
        # physicality along controlled and free trajectories
        breaches = 0
        for k in range(n):
            sigma, baths = random_entangled_state(rng), random_baths(rng)
            g = max(baths.gamma1, baths.gamma2)
            traj = simulate(sigma, baths, strategies[k % len(strategies)], 3.0 / g, 3e-3 / g)
            try:
                check_trajectory(traj)
            except RuntimeError:
                breaches += 1
        results["physicality"] = (breaches == 0, f"{breaches} breaches")

        # E_N non-increasing without control
        rise = 0.0
        for _ in range(n):
            sigma, baths = random_entangled_state(rng), random_baths(rng)
            g = max(baths.gamma1, baths.gamma2)
            en = sample_free(sigma, baths, np.linspace(0, 4.0 / g, 801)).log_negativity
            rise = max(rise, float(np.diff(en).max()))
        results["monotone"] = (rise <= 1e-10, f"max rise {rise:.1e}")

        # local symplectic invariance and normal-form round trip
        inv, rt = 0.0, True
        for _ in range(n):
            sigma = random_entangled_state(rng)
            moved = apply_symplectic(sigma, random_local_symplectic(rng))
            inv = max(inv, abs(log_negativity(moved) - log_negativity(sigma)))
            nf = normal_form(moved)
            params = (nf.a, nf.b, nf.c_plus, nf.c_minus)
            rt &= same_normal_form(params, tuple(normal_form(sigma).as_dict().values()), atol=1e-8)
            rebuilt = normal_form(make_from_normal_form(*params))
            rt &= same_normal_form(params, (rebuilt.a, rebuilt.b, rebuilt.c_plus, rebuilt.c_minus), atol=1e-8)
            rt &= is_physical(moved)
        results["invariance"] = (inv < 1e-9, f"max E_N change {inv:.1e}")
        results["round trip"] = (bool(rt), "ok" if rt else "mismatch")

        fig = run_figure("fig4", {"dt": "2e-3 us"})
        low = min(float(d.min()) for d in fig["comparisons"][0].differences.values())
        results["fig4"] = (low >= -1e-12, f"min repeated-control difference {low:.1e}")

    ok = all(v[0] for v in results.values()) and t.elapsed < 60.0
    detail = "; ".join(f"{k}: {v[1]}" for k, v in results.items())
    return [_record("8", ok, detail, t.elapsed)]


CRITERIA = {"1": criterion_1, "2": criterion_2, "3": criterion_3, "4": criterion_4,
            "5": criterion_5, "6": criterion_6, "7": criterion_7, "8": criterion_8}


@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key):
    start = len(LINES)
    outcome = CRITERIA[key]()
    failed = [line for line in LINES[start:] if line.startswith("[FAIL]")]
    assert all(outcome), "; ".join(failed)


if __name__ == "__main__":
    outcome = [ok for fn in CRITERIA.values() for ok in fn()]
    print(f"\n{sum(outcome)}/{len(outcome)} checks passed")
    sys.exit(0 if all(outcome) else 1)
