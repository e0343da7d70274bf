"""``gaussctl`` command line.

Exit codes: 0 success, 1 invalid input, 2 invariant breach.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gaussctl.config import ConfigError, load_yaml, parse_scenario
from gaussctl.errors import GaussianError
from gaussctl.experiments import (
    InvariantBreach,
    comparison_from_config,
    parse_sweep_values,
    run_figure,
    run_scenario,
    sweep,
    sweep_csv,
    time_override,
    write_figure,
    write_json,
    write_scenario,
)
from gaussctl.presets import preset_names

EXIT_OK, EXIT_INVALID, EXIT_BREACH = 0, 1, 2
DEFAULT_SEED = 20240607


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation errors, not invariant breaches
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", required=True, type=Path, help="scenario YAML file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--seed", type=int, default=None, help="random seed (recorded in outputs)")
    p.add_argument("--dt", default=None, help='time step with unit, e.g. "2e-3 us"')
    p.add_argument("--horizon", default=None, help='simulated time with unit, e.g. "10 us"')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaussctl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _common(sub.add_parser("evolve", help="simulate one scenario"))
    _common(sub.add_parser("compare", help="difference curves against a reference"))

    p = sub.add_parser("sweep", help="scan one numeric config entry")
    _common(p)
    p.add_argument("--axis", help="dotted config path, e.g. baths.chi_over_gamma")
    p.add_argument("--values", help='comma-separated values, e.g. "1.0,1.5,2.0"')

    p = sub.add_parser("figure", help="reproduce a reference scenario set")
    p.add_argument("preset", choices=preset_names())
    _common(p, config=False)

    p = sub.add_parser("verify", help="run the brute-force oracle suites")
    _common(p, config=False)
    p.add_argument("--states", type=int, default=100, help="random states for the control oracle")
    p.add_argument("--derivatives", type=int, default=200, help="random instances for rate checks")
    p.add_argument("--corrupt-coefficient", type=float, default=None, metavar="FACTOR",
                   help=argparse.SUPPRESS)
    return parser


def _overrides(args) -> dict:
    return {"dt": time_override(args.dt, "--dt"), "horizon": time_override(args.horizon, "--horizon")}


def _print(data):
    print(json.dumps(data, indent=2, sort_keys=True))


def cmd_evolve(args) -> int:
    cfg = parse_scenario(load_yaml(args.config), _overrides(args))
    res = run_scenario(cfg)
    path = write_scenario(res, args.out)
    summary = res.summary()
    summary["seed"] = args.seed
    write_json(path.with_suffix(".summary.json"), summary)
    _print(summary)
    return EXIT_OK


def cmd_compare(args) -> int:
    raw = load_yaml(args.config)
    results, cmp = comparison_from_config(raw, _overrides(args))
    for res in results.values():
        write_scenario(res, args.out)
    path = args.out / f"diff_{cmp.quantity}_vs_{cmp.reference}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cmp.csv_text())
    summary = {"file": path.name, **cmp.summary()}
    write_json(args.out / "compare_summary.json", summary)
    _print(summary)
    return EXIT_OK


def cmd_sweep(args) -> int:
    raw = load_yaml(args.config)
    spec = raw.pop("sweep", None) or {}
    axis = args.axis or spec.get("axis")
    if not axis:
        raise ConfigError("sweep: no axis given (--axis or sweep.axis in the config)")
    if args.values is not None:
        values = parse_sweep_values(args.values)
    else:
        values = spec.get("values", [])
        if not isinstance(values, list):
            raise ConfigError("sweep.values must be a list")
    rows = sweep(raw, axis, values, _overrides(args))
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "sweep.csv").write_text(sweep_csv(rows))
    _print({"axis": axis, "rows": rows})
    return EXIT_OK


def cmd_figure(args) -> int:
    fig = run_figure(args.preset, _overrides(args))
    _print(write_figure(fig, args.out))
    return EXIT_OK


def cmd_verify(args) -> int:
    from gaussctl.oracle import run_verification
    from gaussctl.control import SqueezeCoefficients

    hook = None
    if args.corrupt_coefficient is not None:
        factor = args.corrupt_coefficient

        def hook(c):
            return SqueezeCoefficients(c.v1, c.w1 * factor, c.v2, c.w2, c.law)

    if args.states < 0 or args.derivatives < 0:
        raise ConfigError("--states and --derivatives must be non-negative")
    seed = DEFAULT_SEED if args.seed is None else args.seed
    report = run_verification(args.states, args.derivatives, seed, coefficient_hook=hook)
    write_json(args.out / "oracle_report.json", report)
    summary = {k: report[k] for k in ("seed", "passed", "control", "derivatives", "xi_identity")}
    summary["failures"] = report["failures"][:20]
    _print(summary)
    return EXIT_OK if report["passed"] else EXIT_BREACH


COMMANDS = {"evolve": cmd_evolve, "compare": cmd_compare, "sweep": cmd_sweep,
            "figure": cmd_figure, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvariantBreach as exc:
        print(f"gaussctl: invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except GaussianError as exc:
        print(f"gaussctl: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"gaussctl: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
