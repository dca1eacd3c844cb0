import csv
import json
from pathlib import Path

import numpy as np
import pytest

from radcomopt import DeploymentSpec, cli
from radcomopt.harness import (ConfigError, DEFAULT_CONFIG_JSON,
                               ExperimentConfig, TargetWsrError,
                               config_from_dict, config_to_dict,
                               default_rho_grid, parse_config,
                               run_beampattern_experiment, run_power_report,
                               run_tradeoff_sweep, trial_seed,
                               write_baselines_csv, write_sweep_csv)
from radcomopt.model import linear_to_dbm, sample_channels
from radcomopt.sep_solver import SepSolverConfig, run_wmmse_sdp
from radcomopt.shared_solver import MmConfig, run_wmmse_mm


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def small_config(**overrides):
    base = dict(DEFAULT_CONFIG_JSON)
    base.update({"n_trials": 1, "rho_grid": [0.0],
                 "solvers": ["separated", "shared", "baselines"]})
    base.update(overrides)
    return config_from_dict(base)


class TestParseConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.json"
        path.write_text("")
        config = parse_config(path)
        assert config.spec.n_total == 16
        assert config.spec.n_users == 4
        assert config.spec.power_total == pytest.approx(100.0)
        assert config.spec.power_radar == pytest.approx(50.0)
        assert config.spec.target_angle == 0.0
        assert config.n_trials == 100
        assert config.rho_grid == default_rho_grid()
        assert config.alpha_list == (0.51,)

    def test_roundtrip_identity(self, tmp_path):
        config = small_config(n_trials=7, seed=99,
                              rho_grid=[0.0, 1.0, 10.0])
        echoed = config_from_dict(config_to_dict(config))
        assert config_to_dict(echoed) == config_to_dict(config)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_antenas": 8}))
        with pytest.raises(ConfigError, match="n_antenas"):
            parse_config(path)

    def test_invalid_values_name_the_key(self):
        with pytest.raises(ConfigError, match="power_radar_dbm"):
            config_from_dict({**DEFAULT_CONFIG_JSON,
                              "power_radar_dbm": 25.0})
        with pytest.raises(ConfigError, match="rate_weights"):
            config_from_dict({**DEFAULT_CONFIG_JSON,
                              "rate_weights": [1.0, 1.0, 1.0, -1.0]})
        with pytest.raises(ValueError, match="n_trials"):
            config_from_dict({**DEFAULT_CONFIG_JSON, "n_trials": 0})
        with pytest.raises(ValueError, match="rho_grid"):
            config_from_dict({**DEFAULT_CONFIG_JSON, "rho_grid": [-1.0]})

    def test_trial_seed_order_independent(self):
        seeds = {trial_seed(5, t) for t in range(100)}
        assert len(seeds) == 100
        assert trial_seed(5, 3) == trial_seed(5, 3)
        assert trial_seed(5, 3) != trial_seed(6, 3)


class TestTradeoffSweep:
    def test_shared_rho_zero_endpoint(self):
        config = small_config(solvers=["shared"])
        result = run_tradeoff_sweep(config)
        assert len(result.points) == 1
        row = result.points[0]
        assert row.solver == "shared"
        assert row.probing_dbm == pytest.approx(32.04, abs=0.05)
        assert row.converged

    def test_deterministic_outputs(self, tmp_path):
        config = small_config(seed=3)
        tables = []
        for run in range(2):
            result = run_tradeoff_sweep(config)
            path = tmp_path / f"sweep{run}.csv"
            write_sweep_csv(result.points, path)
            rows = read_csv(path)
            wall_col = rows[0].index("wall_ms")
            tables.append([[c for i, c in enumerate(r) if i != wall_col]
                           for r in rows])
        assert tables[0] == tables[1]

    def test_parallel_matches_serial(self):
        config = small_config(rho_grid=[0.0, 1.0], n_trials=2)
        serial = run_tradeoff_sweep(config)
        config2 = small_config(rho_grid=[0.0, 1.0], n_trials=2, jobs=2)
        parallel = run_tradeoff_sweep(config2)
        for a, b in zip(serial.points, parallel.points):
            assert (a.solver, a.rho, a.trial) == (b.solver, b.rho, b.trial)
            assert a.wsr_bps_hz == b.wsr_bps_hz
            assert a.probing_dbm == b.probing_dbm

    def test_failure_rows_keep_sweep_alive(self):
        config = small_config(
            solvers=["separated"], rho_grid=[50.0],
            solver_options={"admm_max_iters": 2, "admm_tol": 1e-14})
        result = run_tradeoff_sweep(config)
        assert len(result.points) == 1
        row = result.points[0]
        assert not row.converged
        assert np.isnan(row.wsr_bps_hz)
        assert result.failures

    def test_means_aggregate_successes(self):
        config = small_config(n_trials=3, solvers=["shared"])
        result = run_tradeoff_sweep(config)
        assert len(result.means) == 1
        solver, rho, n, wsr_mean, probing_mean = result.means[0]
        assert (solver, rho, n) == ("shared", 0.0, 3)
        assert probing_mean == pytest.approx(32.04, abs=0.05)

    def test_baseline_rows_emitted(self, tmp_path):
        config = small_config(n_trials=2)
        result = run_tradeoff_sweep(config)
        labels = {p.label.value for p, _ in result.baseline_rows}
        assert labels == {"freq_division", "time_division", "pure_radar",
                          "pure_comm"}
        path = tmp_path / "baselines.csv"
        write_baselines_csv(result.baseline_rows, path)
        rows = read_csv(path)
        assert rows[0] == list(("label", "alpha", "trial", "wsr_bps_hz",
                                "probing_dbm"))
        assert len(rows) == 1 + 4 * 2


class TestPowerReport:
    def test_shared_rows_exactly_elemental(self, shared_spec):
        ch = sample_channels(shared_spec, 61)
        sol = run_wmmse_mm(ch, shared_spec, MmConfig(), 1.0)
        rows = run_power_report(sol, shared_spec)
        assert len(rows) == 16
        for label, antenna, power, ref in rows:
            assert label == "shared"
            assert ref == pytest.approx(shared_spec.elemental_power)
            assert power == pytest.approx(shared_spec.elemental_power,
                                          abs=1e-10)

    def test_separated_rows(self, sep_spec):
        ch = sample_channels(sep_spec, 62)
        sol = run_wmmse_sdp(ch, sep_spec, SepSolverConfig(rho=1.0))
        rows = run_power_report(sol, sep_spec)
        assert len(rows) == 16
        radar = [power for label, i, power, _ in rows if i < 8]
        comm = [power for label, i, power, _ in rows if i >= 8]
        assert np.abs(np.array(radar)
                      - sep_spec.radar_elemental_power).max() <= 1e-6
        assert sum(comm) <= sep_spec.power_comm + 1e-8


class TestBeampatternExperiment:
    def test_pure_radar_reference_peak(self):
        config = small_config(solvers=["shared"],
                              angle_grid_deg=[-90.0, 90.0, 1.0])
        result = run_beampattern_experiment(config, target_wsr=0.1)
        ref = [(a, p) for label, a, p in result.rows if label == "pure_radar"]
        angles, powers = zip(*ref)
        k = int(np.argmax(powers))
        assert angles[k] == pytest.approx(0.0)
        assert powers[k] == pytest.approx(linear_to_dbm(1600.0), abs=1e-9)

    def test_unreachable_target_raises(self):
        config = small_config(solvers=["shared"],
                              angle_grid_deg=[-90.0, 90.0, 5.0])
        with pytest.raises(TargetWsrError, match="feasible"):
            run_beampattern_experiment(config, target_wsr=1e4)


class TestCli:
    def test_sweep_end_to_end(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = cli.main(["sweep", "--trials", "1", "--rho", "0",
                         "--solver", "shared", "--seed", "5",
                         "--out", str(out)])
        assert code == 0
        assert (out / "sweep.csv").exists()
        assert (out / "sweep_means.csv").exists()
        assert (out / "baselines.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 5
        rows = read_csv(out / "sweep.csv")
        assert rows[0] == list(("solver", "rho", "trial", "wsr_bps_hz",
                                "probing_dbm", "iterations", "wall_ms",
                                "converged"))

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"nope": 1}))
        assert cli.main(["sweep", "--config", str(bad)]) == 1

    def test_solver_failure_exit_code(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "n_trials": 1, "rho_grid": [50.0], "solvers": ["separated"],
            "solver_options": {"admm_max_iters": 2, "admm_tol": 1e-14},
            "output_dir": str(tmp_path / "out")}))
        assert cli.main(["sweep", "--config", str(cfg)]) == 2

    def test_power_report_cli(self, tmp_path):
        out = tmp_path / "pr"
        code = cli.main(["power-report", "--trials", "1", "--rho", "1.0",
                         "--solver", "all", "--out", str(out)])
        assert code == 0
        rows = read_csv(out / "power_report.csv")
        assert rows[0] == list(("label", "antenna", "power",
                                "elemental_power"))
        labels = {r[0] for r in rows[1:]}
        assert labels == {"separated", "shared"}
