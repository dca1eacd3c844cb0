import csv
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from radcomplots import (FigureKind, FigureSpec, SchemaError, render,
                         render_beampattern, render_power_bars,
                         render_tradeoff)
from radcomplots.cli import main as cli_main


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)


@pytest.fixture
def beampattern_csv(tmp_path):
    path = tmp_path / "beampattern.csv"
    angles = np.arange(-90.0, 91.0, 1.0)
    rows = []
    for label, peak in [("pure_radar", 32.0), ("shared", 31.5),
                        ("separated", 29.0)]:
        for a in angles:
            rows.append([label, a, peak - 0.01 * a ** 2, 0.0])
    write_csv(path, ["label", "angle_deg", "power_db", "target_angle_deg"],
              rows)
    return path


@pytest.fixture
def power_csv(tmp_path):
    path = tmp_path / "power.csv"
    rows = [["shared", i, 6.25, 6.25] for i in range(16)]
    rows += [["separated", i, 6.25 if i < 8 else 5.0, 6.25]
             for i in range(16)]
    write_csv(path, ["label", "antenna", "power", "elemental_power"], rows)
    return path


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    rows = []
    for solver, base in [("separated", 29.0), ("shared", 32.0)]:
        for i, rho in enumerate([0.0, 1.0, 10.0, 100.0]):
            for trial in range(3):
                wsr = 0.5 + i + 0.05 * trial
                rows.append([solver, rho, trial, wsr, base - 0.8 * i,
                             5, 12.0, "true"])
    write_csv(path, ["solver", "rho", "trial", "wsr_bps_hz", "probing_dbm",
                     "iterations", "wall_ms", "converged"], rows)
    return path


@pytest.fixture
def baselines_csv(tmp_path):
    path = tmp_path / "baselines.csv"
    rows = []
    for trial in range(3):
        rows.append(["freq_division", "", trial, 7.2, 29.03])
        rows.append(["time_division", 0.51, trial, 4.2, 28.9])
        rows.append(["pure_radar", "", trial, 0.0, 32.04])
        rows.append(["pure_comm", "", trial, 8.3, 14.0])
    write_csv(path, ["label", "alpha", "trial", "wsr_bps_hz", "probing_dbm"],
              rows)
    return path


class TestBeampattern:
    def test_three_curves_three_legend_entries(self, beampattern_csv,
                                               tmp_path):
        out = tmp_path / "fig.png"
        fig = render_beampattern(FigureSpec(beampattern_csv,
                                            FigureKind.BEAMPATTERN, out))
        legend = fig.axes[0].get_legend()
        texts = [t.get_text() for t in legend.get_texts()]
        assert texts == ["pure_radar", "separated", "shared"]
        assert out.exists()
        assert out.with_suffix(".svg").exists()

    def test_flat_pattern_is_horizontal(self, tmp_path):
        path = tmp_path / "flat.csv"
        write_csv(path, ["label", "angle_deg", "power_db",
                         "target_angle_deg"],
                  [["iso", a, 13.01, 0.0] for a in range(-90, 91, 5)])
        fig = render_beampattern(FigureSpec(path, FigureKind.BEAMPATTERN,
                                            tmp_path / "flat.png"))
        y = fig.axes[0].lines[0].get_ydata()
        assert np.allclose(y, 13.01)

    def test_missing_columns_listed(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, ["label", "angle_deg"], [["x", 0.0]])
        with pytest.raises(SchemaError) as err:
            render_beampattern(FigureSpec(path, FigureKind.BEAMPATTERN,
                                          tmp_path / "x.png"))
        assert err.value.missing == ["power_db", "target_angle_deg"]


class TestPowerBars:
    def test_reference_line_at_budget(self, power_csv, tmp_path):
        fig = render_power_bars(FigureSpec(power_csv, FigureKind.POWER_BARS,
                                           tmp_path / "p.png"))
        ax = fig.axes[0]
        hline = [ln for ln in ax.lines if len(set(ln.get_ydata())) == 1]
        assert hline and hline[0].get_ydata()[0] == pytest.approx(6.25)

    def test_grouped_bars_per_label(self, power_csv, tmp_path):
        fig = render_power_bars(FigureSpec(power_csv, FigureKind.POWER_BARS,
                                           tmp_path / "p.png"))
        assert len(fig.axes[0].patches) == 32  # 16 antennas x 2 labels

    def test_schema_error(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, ["label", "antenna"], [["x", 0]])
        with pytest.raises(SchemaError):
            render_power_bars(FigureSpec(path, FigureKind.POWER_BARS,
                                         tmp_path / "x.png"))


class TestTradeoff:
    def test_curves_are_per_solver_means(self, sweep_csv, tmp_path):
        fig = render_tradeoff(FigureSpec(sweep_csv, FigureKind.TRADEOFF,
                                         tmp_path / "t.png"))
        ax = fig.axes[0]
        by_label = {ln.get_label(): ln for ln in ax.lines}
        assert {"separated", "shared"} <= set(by_label)
        x = by_label["shared"].get_xdata()
        assert len(x) == 4
        assert x[0] == pytest.approx(0.55)  # mean over the three trials

    def test_baseline_markers(self, sweep_csv, baselines_csv, tmp_path):
        fig = render_tradeoff(FigureSpec(sweep_csv, FigureKind.TRADEOFF,
                                         tmp_path / "t.png",
                                         baselines_csv=baselines_csv))
        labels = [t.get_text()
                  for t in fig.axes[0].get_legend().get_texts()]
        assert "frequency division" in labels
        assert "time division" in labels
        assert any("alpha=0.51" in t for t in labels)

    def test_rerun_overwrites(self, sweep_csv, tmp_path):
        out = tmp_path / "t.png"
        spec = FigureSpec(sweep_csv, FigureKind.TRADEOFF, out)
        render(spec)
        first = out.stat().st_size
        render(spec)
        assert out.exists() and out.stat().st_size == first


class TestCli:
    def test_cli_renders(self, beampattern_csv, tmp_path):
        out = tmp_path / "cli.png"
        code = cli_main(["beampattern", "--in", str(beampattern_csv),
                         "--out", str(out)])
        assert code == 0
        assert out.exists() and out.with_suffix(".svg").exists()

    def test_cli_schema_error_exit(self, tmp_path):
        bad = tmp_path / "bad.csv"
        write_csv(bad, ["label"], [["x"]])
        assert cli_main(["tradeoff", "--in", str(bad),
                         "--out", str(tmp_path / "x.png")]) == 1


@pytest.fixture(scope="module")
def harness_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("harness")
    runs = [
        ["radcom", "sweep", "--trials", "2", "--rho", "0,100",
         "--solver", "all", "--seed", "7", "--out", str(out)],
        ["radcom", "beampattern", "--trials", "1", "--target-wsr", "0.5",
         "--solver", "shared", "--seed", "7", "--out", str(out)],
        ["radcom", "power-report", "--trials", "1", "--rho", "10",
         "--solver", "all", "--seed", "7", "--out", str(out)],
    ]
    for cmd in runs:
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return out


@pytest.mark.end_to_end
class TestAgainstHarnessOutput:
    """Regenerate all three figure kinds from real harness CSV output."""

    def test_all_three_kinds_render(self, harness_out, tmp_path):
        specs = [
            FigureSpec(harness_out / "sweep.csv", FigureKind.TRADEOFF,
                       tmp_path / "tradeoff.png",
                       baselines_csv=harness_out / "baselines.csv"),
            FigureSpec(harness_out / "beampattern.csv",
                       FigureKind.BEAMPATTERN, tmp_path / "beam.png"),
            FigureSpec(harness_out / "power_report.csv",
                       FigureKind.POWER_BARS, tmp_path / "power.png"),
        ]
        for spec in specs:
            out = render(spec)
            assert Path(out).exists()
            assert Path(out).with_suffix(".svg").exists()
