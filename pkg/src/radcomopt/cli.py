"""Command line interface.

Subcommands: sweep, beampattern, power-report, baseline. Exit codes:
0 success, 1 configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .harness import (ConfigError, DEFAULT_CONFIG_JSON, ExperimentConfig,
                      config_from_dict, parse_config)
from .sep_solver import run_wmmse_sdp
from .shared_solver import run_wmmse_mm


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; config errors are exit code 1 here
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser):
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--solver", choices=["separated", "shared", "all"],
                        help="which solvers to run")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--rho", type=str,
                        help="comma-separated regularization values")
    parser.add_argument("--jobs", type=int, help="parallel workers")


def build_parser():
    parser = _Parser(prog="radcom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="tradeoff sweep over rho")
    _add_common(p)
    p.add_argument("--alpha", type=float,
                   help="time-division fraction for the baseline rows")

    p = sub.add_parser("beampattern", help="beampatterns at a target WSR")
    _add_common(p)
    p.add_argument("--target-wsr", type=float, required=True,
                   help="target weighted sum rate, bps/Hz")

    p = sub.add_parser("power-report", help="per-antenna transmit powers")
    _add_common(p)

    p = sub.add_parser("baseline", help="baseline points only")
    _add_common(p)
    p.add_argument("--alpha", type=float,
                   help="time-division fraction")
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        config = parse_config(args.config)
    else:
        config = config_from_dict(dict(DEFAULT_CONFIG_JSON))
    if args.seed is not None:
        config.seed = args.seed
    if args.trials is not None:
        config.n_trials = args.trials
    if args.solver is not None:
        config.solvers = (harness.SOLVER_NAMES if args.solver == "all"
                          else (args.solver, "baselines"))
    if args.out is not None:
        config.output_dir = args.out
    if args.rho is not None:
        try:
            config.rho_grid = tuple(float(x) for x in args.rho.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --rho list: {exc}") from exc
    if getattr(args, "alpha", None) is not None:
        config.alpha_list = (args.alpha,)
    if args.jobs is not None:
        config.jobs = args.jobs
    # re-validate after overrides
    return ExperimentConfig(**{f: getattr(config, f)
                               for f in config.__dataclass_fields__})


def _cmd_sweep(config: ExperimentConfig) -> int:
    result = harness.run_tradeoff_sweep(config)
    out = config.output_dir
    harness.write_sweep_csv(result.points, out / "sweep.csv")
    harness.write_means_csv(result.means, out / "sweep_means.csv")
    if result.baseline_rows:
        harness.write_baselines_csv(result.baseline_rows,
                                    out / "baselines.csv")
    harness.write_manifest(config, out / "manifest.json",
                           {"command": "sweep"})
    for p in result.failures:
        print(f"solver failure: {p.solver} rho={p.rho} trial={p.trial}: "
              f"{p.error}", file=sys.stderr)
    print(f"wrote {len(result.points)} sweep rows to {out}")
    return 2 if result.failures else 0


def _cmd_beampattern(config: ExperimentConfig, target_wsr: float) -> int:
    result = harness.run_beampattern_experiment(config, target_wsr)
    out = config.output_dir
    harness.write_beampattern_csv(result, out / "beampattern.csv")
    harness.write_manifest(config, out / "manifest.json",
                           {"command": "beampattern",
                            "target_wsr": target_wsr,
                            "achieved_wsr": result.achieved_wsr,
                            "rho_used": result.rho_used})
    for label, wsr in result.achieved_wsr.items():
        print(f"{label}: wsr={wsr:.3f} bps/Hz (rho={result.rho_used[label]})")
    print(f"wrote beampattern table to {out}")
    return 0


def _cmd_power_report(config: ExperimentConfig) -> int:
    # average the per-antenna powers over the configured trials at the
    # first rho of the grid
    rho = config.rho_grid[0]
    spec = config.spec
    accum = {}
    for t in range(config.n_trials):
        ch = harness.sample_channels(spec, harness.trial_seed(config.seed, t))
        if "separated" in config.solvers:
            sol = run_wmmse_sdp(ch, spec, config.sep_config(rho))
            for label, idx, power, ref in harness.run_power_report(sol, spec):
                accum.setdefault((label, idx, ref), []).append(power)
        if "shared" in config.solvers:
            sol = run_wmmse_mm(ch, spec, config.mm_config(), rho)
            for label, idx, power, ref in harness.run_power_report(sol, spec):
                accum.setdefault((label, idx, ref), []).append(power)
    rows = [(label, idx, float(np.mean(vals)), ref)
            for (label, idx, ref), vals in sorted(accum.items())]
    out = config.output_dir
    harness.write_power_csv(rows, out / "power_report.csv")
    harness.write_manifest(config, out / "manifest.json",
                           {"command": "power-report", "rho": rho})
    print(f"wrote power report ({len(rows)} rows) to {out}")
    return 0


def _cmd_baseline(config: ExperimentConfig) -> int:
    rows = []
    for t in range(config.n_trials):
        rows.extend(harness._baseline_rows(config, t))
    out = config.output_dir
    harness.write_baselines_csv(rows, out / "baselines.csv")
    harness.write_manifest(config, out / "manifest.json",
                           {"command": "baseline"})
    print(f"wrote {len(rows)} baseline rows to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "sweep":
            return _cmd_sweep(config)
        if args.command == "beampattern":
            try:
                return _cmd_beampattern(config, args.target_wsr)
            except harness.TargetWsrError as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return 1
        if args.command == "power-report":
            return _cmd_power_report(config)
        if args.command == "baseline":
            return _cmd_baseline(config)
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
