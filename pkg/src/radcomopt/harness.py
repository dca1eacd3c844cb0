"""Experiment orchestration: seeded Monte Carlo sweeps and reports.

All emitted metrics are recomputed from the returned precoders/covariances
through the ``model`` module, never copied out of solver internals (a
cross-check asserts the two agree). Output is CSV plus a JSON run manifest;
identical configurations produce identical files apart from the wall-clock
timing column.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels, baselines, model
from .model import (ChannelRealization, Deployment, DeploymentSpec,
                    beampattern, dbm_to_linear, linear_to_dbm,
                    probing_power_separated, probing_power_shared,
                    sample_channels, transmit_covariance_separated,
                    wsr_separated, wsr_shared)
from .sep_solver import (InitStrategy, SepSolverConfig, StopCriterion,
                         run_wmmse_sdp)
from .shared_solver import MmConfig, MmStopCriterion, run_wmmse_mm

SOLVER_NAMES = ("separated", "shared", "baselines")

SWEEP_COLUMNS = ("solver", "rho", "trial", "wsr_bps_hz", "probing_dbm",
                 "iterations", "wall_ms", "converged")
MEANS_COLUMNS = ("solver", "rho", "n_trials", "wsr_bps_hz_mean",
                 "probing_dbm_mean")
BASELINE_COLUMNS = ("label", "alpha", "trial", "wsr_bps_hz", "probing_dbm")
BEAMPATTERN_COLUMNS = ("label", "angle_deg", "power_db", "target_angle_deg")
POWER_COLUMNS = ("label", "antenna", "power", "elemental_power")

_SEP_OPTION_KEYS = ("eps_outer", "admm_penalty", "admm_tol", "admm_max_iters",
                    "bisection_tol", "outer_max_iters", "stop_on",
                    "init_strategy")
_MM_OPTION_KEYS = ("eps_inner", "inner_max_iters", "eps_outer",
                   "outer_max_iters", "stop_on")


def default_rho_grid() -> tuple:
    """{0} plus 24 log-spaced points over [1e-2, 1e3]."""
    return (0.0,) + tuple(float(x) for x in np.logspace(-2.0, 3.0, 24))


@dataclass
class ExperimentConfig:
    spec: DeploymentSpec
    rho_grid: tuple = field(default_factory=default_rho_grid)
    n_trials: int = 100
    seed: int = 0
    solvers: tuple = SOLVER_NAMES
    output_dir: Path = Path("out")
    angle_grid_deg: tuple = (-90.0, 90.0, 0.5)
    alpha_list: tuple = (0.51,)
    jobs: int = 1
    solver_options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rho_grid = tuple(float(r) for r in self.rho_grid)
        if not self.rho_grid or any(r < 0 for r in self.rho_grid):
            raise ValueError("rho_grid must be non-empty and nonnegative")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        unknown = set(self.solvers) - set(SOLVER_NAMES)
        if unknown:
            raise ValueError(f"unknown solvers: {sorted(unknown)}")
        unknown = set(self.solver_options) - set(_SEP_OPTION_KEYS) \
            - set(_MM_OPTION_KEYS)
        if unknown:
            raise ValueError(f"unknown solver_options: {sorted(unknown)}")
        self.output_dir = Path(self.output_dir)

    def angle_grid_rad(self) -> np.ndarray:
        start, stop, step = self.angle_grid_deg
        n = int(round((stop - start) / step)) + 1
        return np.deg2rad(start + step * np.arange(n))

    def sep_config(self, rho: float) -> SepSolverConfig:
        opts = {k: v for k, v in self.solver_options.items()
                if k in _SEP_OPTION_KEYS}
        if "stop_on" in opts:
            opts["stop_on"] = StopCriterion(opts["stop_on"])
        if "init_strategy" in opts:
            opts["init_strategy"] = InitStrategy(opts["init_strategy"])
        return SepSolverConfig(rho=rho, **opts)

    def mm_config(self) -> MmConfig:
        opts = {k: v for k, v in self.solver_options.items()
                if k in _MM_OPTION_KEYS}
        if "stop_on" in opts:
            opts["stop_on"] = MmStopCriterion(opts["stop_on"])
        return MmConfig(**opts)


DEFAULT_CONFIG_JSON = {
    "n_antennas": 16,
    "n_radar": None,
    "spacing": 0.5,
    "n_users": 4,
    "power_total_dbm": 20.0,
    "power_radar_dbm": None,
    "target_angle_deg": 0.0,
    "rate_weights": None,
    "rho_grid": None,
    "n_trials": 100,
    "seed": 0,
    "solvers": list(SOLVER_NAMES),
    "output_dir": "out",
    "angle_grid_deg": [-90.0, 90.0, 0.5],
    "alpha_list": [0.51],
    "jobs": 1,
    "solver_options": {},
}


class ConfigError(ValueError):
    pass


def parse_config(path) -> ExperimentConfig:
    """Read a JSON config file; missing keys take the defaults above.

    An empty file means "all defaults". Unknown keys raise ConfigError
    naming the key, as do invalid values.
    """
    text = Path(path).read_text()
    if not text.strip():
        raw = {}
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(raw) - set(DEFAULT_CONFIG_JSON)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**DEFAULT_CONFIG_JSON, **raw}
    return config_from_dict(merged)


def config_from_dict(d: dict) -> ExperimentConfig:
    for key in ("power_total_dbm", "power_radar_dbm"):
        val = d.get(key)
        if val is not None and dbm_to_linear(val) <= 0:
            raise ConfigError(f"{key} must map to a positive power")
    power_total = dbm_to_linear(d["power_total_dbm"])
    power_radar = (dbm_to_linear(d["power_radar_dbm"])
                   if d["power_radar_dbm"] is not None else power_total / 2.0)
    if power_radar >= power_total:
        raise ConfigError("power_radar_dbm must be below power_total_dbm")
    try:
        spec = DeploymentSpec.separated(
            n_total=d["n_antennas"], n_users=d["n_users"],
            power_total=power_total,
            target_angle_deg=d["target_angle_deg"], spacing=d["spacing"],
            n_radar=d["n_radar"], power_radar=power_radar,
            rate_weights=tuple(d["rate_weights"] or ()))
        rho_grid = (tuple(d["rho_grid"]) if d["rho_grid"] is not None
                    else default_rho_grid())
        return ExperimentConfig(
            spec=spec, rho_grid=rho_grid, n_trials=d["n_trials"],
            seed=d["seed"], solvers=tuple(d["solvers"]),
            output_dir=Path(d["output_dir"]),
            angle_grid_deg=tuple(d["angle_grid_deg"]),
            alpha_list=tuple(d["alpha_list"]), jobs=d["jobs"],
            solver_options=dict(d["solver_options"]))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    spec = config.spec
    return {
        "n_antennas": spec.n_total,
        "n_radar": spec.n_radar,
        "spacing": spec.spacing,
        "n_users": spec.n_users,
        "power_total_dbm": linear_to_dbm(spec.power_total),
        "power_radar_dbm": linear_to_dbm(spec.power_radar),
        "target_angle_deg": float(np.rad2deg(spec.target_angle)),
        "rate_weights": list(spec.rate_weights),
        "rho_grid": list(config.rho_grid),
        "n_trials": config.n_trials,
        "seed": config.seed,
        "solvers": list(config.solvers),
        "output_dir": str(config.output_dir),
        "angle_grid_deg": list(config.angle_grid_deg),
        "alpha_list": list(config.alpha_list),
        "jobs": config.jobs,
        "solver_options": dict(config.solver_options),
    }


def trial_seed(master_seed: int, trial: int) -> int:
    """Independent per-trial stream key; order independent across trials."""
    seq = np.random.SeedSequence([int(master_seed), int(trial)])
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TradeoffPoint:
    solver: str
    rho: float
    trial: int
    trial_seed: int
    wsr_bps_hz: float
    probing_dbm: float
    iterations: int
    wall_ms: float
    converged: bool
    error: str = ""


def _check_metric_agreement(reported: float, recomputed: float):
    if abs(reported - recomputed) > 1e-8 * max(1.0, abs(recomputed)):
        raise AssertionError(
            f"solver-reported WSR {reported} disagrees with model "
            f"recomputation {recomputed}")


def _solve_point(config: ExperimentConfig, solver: str, rho: float,
                 trial: int) -> TradeoffPoint:
    seed = trial_seed(config.seed, trial)
    ch = sample_channels(config.spec, seed)
    t0 = time.perf_counter()
    try:
        if solver == "separated":
            sol = run_wmmse_sdp(ch, config.spec, config.sep_config(rho))
            wsr = wsr_separated(sol.precoders, sol.covariance, ch,
                                config.spec.weights)
            probing = probing_power_separated(sol.precoders, sol.covariance,
                                              config.spec)
        else:
            sol = run_wmmse_mm(ch, config.spec, config.mm_config(), rho)
            wsr = wsr_shared(sol.precoders, ch, config.spec.weights)
            probing = probing_power_shared(sol.precoders,
                                           config.spec.as_shared())
        _check_metric_agreement(sol.wsr_history[-1], wsr)
        wall_ms = (time.perf_counter() - t0) * 1e3
        return TradeoffPoint(solver=solver, rho=rho, trial=trial,
                             trial_seed=seed, wsr_bps_hz=wsr,
                             probing_dbm=linear_to_dbm(probing),
                             iterations=sol.n_iterations, wall_ms=wall_ms,
                             converged=sol.converged)
    except Exception as exc:  # noqa: BLE001  (failure rows keep sweeps alive)
        wall_ms = (time.perf_counter() - t0) * 1e3
        return TradeoffPoint(solver=solver, rho=rho, trial=trial,
                             trial_seed=seed, wsr_bps_hz=float("nan"),
                             probing_dbm=float("nan"), iterations=0,
                             wall_ms=wall_ms, converged=False, error=str(exc))


def _baseline_rows(config: ExperimentConfig, trial: int) -> list:
    ch = sample_channels(config.spec, trial_seed(config.seed, trial))
    points = [baselines.frequency_division_point(ch, config.spec),
              baselines.pure_radar_point(config.spec),
              baselines.pure_comm_point(ch, config.spec)]
    points += [baselines.time_division_point(ch, config.spec, a)
               for a in config.alpha_list]
    return [(p, trial) for p in points]


@dataclass
class SweepResult:
    points: list
    baseline_rows: list
    means: list

    @property
    def failures(self) -> list:
        return [p for p in self.points if p.error]


def run_tradeoff_sweep(config: ExperimentConfig) -> SweepResult:
    """Run every (solver, rho, trial) combination and aggregate means.

    Tasks execute concurrently when config.jobs > 1; rows are merged in
    (solver, rho index, trial) order regardless of completion order.
    Solver failures become rows with converged=false and NaN metrics.
    """
    solvers = [s for s in ("separated", "shared") if s in config.solvers]
    tasks = [(s, i, t) for s in solvers
             for i in range(len(config.rho_grid))
             for t in range(config.n_trials)]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(
                _solve_point,
                [config] * len(tasks),
                [s for s, _, _ in tasks],
                [config.rho_grid[i] for _, i, _ in tasks],
                [t for _, _, t in tasks],
                chunksize=4))
    else:
        results = [_solve_point(config, s, config.rho_grid[i], t)
                   for s, i, t in tasks]
    order = {(s, i, t): k for k, (s, i, t) in enumerate(tasks)}
    points = [results[order[key]] for key in sorted(order)]

    baseline_rows = []
    if "baselines" in config.solvers:
        for t in range(config.n_trials):
            baseline_rows.extend(_baseline_rows(config, t))

    means = []
    for solver in solvers:
        for rho in config.rho_grid:
            ok = [p for p in points
                  if p.solver == solver and p.rho == rho and not p.error]
            if not ok:
                continue
            wsr = float(np.mean([p.wsr_bps_hz for p in ok]))
            linear = float(np.mean([dbm_to_linear(p.probing_dbm) for p in ok]))
            means.append((solver, rho, len(ok), wsr, linear_to_dbm(linear)))
    return SweepResult(points=points, baseline_rows=baseline_rows, means=means)


@dataclass
class BeampatternResult:
    rows: list                      # (label, angle_deg, power_db)
    achieved_wsr: dict              # label -> mean WSR (NaN for pure_radar)
    rho_used: dict
    target_angle_deg: float


class TargetWsrError(ValueError):
    """Requested WSR above what the solver can reach."""

    def __init__(self, solver, target, feasible_range):
        self.feasible_range = feasible_range
        super().__init__(
            f"target WSR {target} bps/Hz unreachable for {solver}; feasible "
            f"range is [{feasible_range[0]:.3f}, {feasible_range[1]:.3f}]")


def _mean_solution(config, solver, rho, n_trials):
    """Trial-mean WSR and trial-mean transmit covariance at one rho."""
    wsrs, covs = [], []
    for t in range(n_trials):
        ch = sample_channels(config.spec, trial_seed(config.seed, t))
        if solver == "separated":
            sol = run_wmmse_sdp(ch, config.spec, config.sep_config(rho))
            wsrs.append(wsr_separated(sol.precoders, sol.covariance, ch,
                                      config.spec.weights))
            covs.append(transmit_covariance_separated(sol.precoders,
                                                      sol.covariance))
        else:
            sol = run_wmmse_mm(ch, config.spec, config.mm_config(), rho)
            wsrs.append(wsr_shared(sol.precoders, ch, config.spec.weights))
            covs.append(sol.precoders @ sol.precoders.conj().T)
    return float(np.mean(wsrs)), np.mean(covs, axis=0)


def run_beampattern_experiment(config: ExperimentConfig, target_wsr: float,
                               wsr_tol: float = 0.1,
                               max_bisections: int = 30) -> BeampatternResult:
    """Find rho per solver reaching the target WSR, then sample beampatterns.

    Bisects rho until the trial-mean WSR is within ``wsr_tol`` of the
    target. A target below the rho=0 WSR floor uses rho=0 (the floor is
    reported in ``achieved_wsr``); a target above the largest reachable WSR
    raises TargetWsrError naming the feasible range.
    """
    angles = config.angle_grid_rad()
    spec = config.spec
    rows, achieved, rho_used = [], {}, {}

    ref_cov = baselines.radar_max_power_covariance(
        spec.target_angle, spec.n_total, spec.power_total, spec.spacing)
    ref_db = beampattern(ref_cov, spec.geometry, angles)
    rows += [("pure_radar", float(np.rad2deg(a)), float(v))
             for a, v in zip(angles, ref_db)]
    achieved["pure_radar"] = float("nan")
    rho_used["pure_radar"] = float("nan")

    for solver in (s for s in ("separated", "shared") if s in config.solvers):
        wsr_lo, cov_lo = _mean_solution(config, solver, 0.0, config.n_trials)
        if target_wsr <= wsr_lo + wsr_tol:
            rho, wsr, cov = 0.0, wsr_lo, cov_lo
        else:
            hi = max(max(config.rho_grid), 1.0)
            wsr_hi, cov_hi = _mean_solution(config, solver, hi,
                                            config.n_trials)
            for _ in range(8):
                if wsr_hi >= target_wsr:
                    break
                hi *= 4.0
                wsr_hi, cov_hi = _mean_solution(config, solver, hi,
                                                config.n_trials)
            if wsr_hi < target_wsr:
                raise TargetWsrError(solver, target_wsr, (wsr_lo, wsr_hi))
            lo = hi * 1e-8
            rho, wsr, cov = hi, wsr_hi, cov_hi
            for _ in range(max_bisections):
                if abs(wsr - target_wsr) <= wsr_tol:
                    break
                mid = float(np.sqrt(lo * hi))
                wsr_mid, cov_mid = _mean_solution(config, solver, mid,
                                                  config.n_trials)
                if wsr_mid < target_wsr:
                    lo = mid
                else:
                    hi, rho, wsr, cov = mid, mid, wsr_mid, cov_mid
        geometry = spec.geometry
        rows += [(solver, float(np.rad2deg(a)), float(v))
                 for a, v in zip(angles, beampattern(cov, geometry, angles))]
        achieved[solver] = wsr
        rho_used[solver] = rho
    return BeampatternResult(rows=rows, achieved_wsr=achieved,
                             rho_used=rho_used,
                             target_angle_deg=float(np.rad2deg(spec.target_angle)))


def run_power_report(solution, spec: DeploymentSpec) -> list:
    """Per-antenna average transmit power rows from a solved state.

    Separated solutions contribute [diag(R_x); diag(P P^H)] (radar antennas
    first), shared ones diag(P P^H). Rows are (label, antenna, power,
    elemental_power) with the shared per-antenna level as the reference.
    """
    ref = spec.elemental_power
    if hasattr(solution, "covariance"):
        radar = np.real(np.diag(solution.covariance))
        comm = np.sum(np.abs(solution.precoders) ** 2, axis=1)
        powers = np.concatenate([radar, comm])
        label = "separated"
    else:
        powers = np.sum(np.abs(solution.precoders) ** 2, axis=1)
        label = "shared"
    return [(label, i, float(p), ref) for i, p in enumerate(powers)]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_sweep_csv(points, path):
    _write_csv(path, SWEEP_COLUMNS,
               [(p.solver, p.rho, p.trial, p.wsr_bps_hz, p.probing_dbm,
                 p.iterations, p.wall_ms, p.converged) for p in points])


def write_means_csv(means, path):
    _write_csv(path, MEANS_COLUMNS, means)


def write_baselines_csv(rows, path):
    _write_csv(path, BASELINE_COLUMNS,
               [(p.label.value, "" if p.alpha is None else _fmt(p.alpha),
                 trial, p.wsr, linear_to_dbm(p.probing) if p.probing > 0
                 else float("-inf")) for p, trial in rows])


def write_beampattern_csv(result: BeampatternResult, path):
    _write_csv(path, BEAMPATTERN_COLUMNS,
               [(label, angle, power, result.target_angle_deg)
                for label, angle, power in result.rows])


def write_power_csv(rows, path):
    _write_csv(path, POWER_COLUMNS, rows)


def write_manifest(config: ExperimentConfig, path, extra=None):
    from . import __version__
    manifest = {
        "config": config_to_dict(config),
        "versions": {"radcomopt": __version__, "numpy": np.__version__},
        "kernel_backend": _kernels.BACKEND,
    }
    if extra:
        manifest.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
