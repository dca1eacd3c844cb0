"""Render the three experiment figure families from radcomopt CSV files.

Consumed schemas (column order free, extra columns ignored):

* beampattern: label, angle_deg, power_db, target_angle_deg
* power bars:  label, antenna, power, elemental_power
* tradeoff:    solver, rho, trial, wsr_bps_hz, probing_dbm, ... plus an
  optional baselines table label, alpha, trial, wsr_bps_hz, probing_dbm

Each renderer writes the figure to the requested path and an SVG twin next
to it, overwriting idempotently, and returns the matplotlib Figure.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class FigureKind(Enum):
    BEAMPATTERN = "beampattern"
    POWER_BARS = "power-bars"
    TRADEOFF = "tradeoff"


@dataclass(frozen=True)
class FigureSpec:
    input_csv: Path
    figure_kind: FigureKind
    output_path: Path
    db_axis: bool = True
    baselines_csv: Path | None = None


class SchemaError(ValueError):
    def __init__(self, path, missing):
        self.missing = sorted(missing)
        super().__init__(f"{path} is missing columns: {', '.join(self.missing)}")


def read_table(path, required):
    """Read the CSV into column lists, checking the required columns."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or [])
        missing = set(required) - header
        if missing:
            raise SchemaError(path, missing)
        rows = list(reader)
    return rows


def _floats(rows, column):
    return np.array([float(r[column]) for r in rows])


def _save(fig, output_path):
    out = Path(output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    fig.savefig(out.with_suffix(".svg"))
    return out


def render_beampattern(spec: FigureSpec):
    """Overlaid dB-vs-angle curves, one per label, marker at the target."""
    rows = read_table(spec.input_csv,
                      ["label", "angle_deg", "power_db", "target_angle_deg"])
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    labels = sorted({r["label"] for r in rows})
    for label in labels:
        sub = [r for r in rows if r["label"] == label]
        angles = _floats(sub, "angle_deg")
        power = _floats(sub, "power_db")
        order = np.argsort(angles)
        ax.plot(angles[order], power[order], label=label)
    target = float(rows[0]["target_angle_deg"])
    ax.axvline(target, color="0.4", linestyle=":", linewidth=1.0)
    ax.set_xlabel("angle (deg)")
    ax.set_ylabel("beampattern (dB)" if spec.db_axis else "beampattern")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, spec.output_path)
    return fig


def render_power_bars(spec: FigureSpec):
    """Grouped per-antenna power bars with the per-antenna reference line."""
    rows = read_table(spec.input_csv,
                      ["label", "antenna", "power", "elemental_power"])
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    labels = sorted({r["label"] for r in rows})
    width = 0.8 / len(labels)
    for i, label in enumerate(labels):
        sub = [r for r in rows if r["label"] == label]
        idx = _floats(sub, "antenna")
        power = _floats(sub, "power")
        order = np.argsort(idx)
        ax.bar(idx[order] + (i - (len(labels) - 1) / 2) * width,
               power[order], width=width, label=label)
    ref = float(rows[0]["elemental_power"])
    ax.axhline(ref, color="0.3", linestyle="--", linewidth=1.0,
               label="per-antenna budget")
    ax.set_xlabel("antenna index")
    ax.set_ylabel("average transmit power")
    ax.legend()
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    _save(fig, spec.output_path)
    return fig


def _baseline_overlays(ax, baselines_csv):
    rows = read_table(baselines_csv,
                      ["label", "alpha", "trial", "wsr_bps_hz", "probing_dbm"])

    def mean_point(label):
        sub = [r for r in rows if r["label"] == label]
        if not sub:
            return None
        wsr = _floats(sub, "wsr_bps_hz").mean()
        linear = np.mean(10.0 ** (_floats(sub, "probing_dbm") / 10.0))
        return float(wsr), float(10.0 * np.log10(linear))

    fd = mean_point("freq_division")
    if fd:
        ax.plot(*fd, marker="s", color="tab:red", linestyle="none",
                label="frequency division")
    comm = mean_point("pure_comm")
    radar = mean_point("pure_radar")
    if comm and radar:
        # time sharing between the two pure operating points
        alphas = np.linspace(0.005, 0.995, 200)
        wsr = alphas * comm[0]
        probing = (1.0 - alphas) * 10.0 ** (radar[1] / 10.0)
        ax.plot(wsr, 10.0 * np.log10(probing), color="0.5", linestyle="--",
                label="time division")
    td = [r for r in rows if r["label"] == "time_division" and r["alpha"]]
    for alpha in sorted({r["alpha"] for r in td}):
        sub = [r for r in td if r["alpha"] == alpha]
        wsr = _floats(sub, "wsr_bps_hz").mean()
        linear = np.mean(10.0 ** (_floats(sub, "probing_dbm") / 10.0))
        ax.plot(wsr, 10.0 * np.log10(linear), marker="o", color="0.35",
                linestyle="none",
                label=f"time division (alpha={float(alpha):g})")


def render_tradeoff(spec: FigureSpec):
    """Per-solver trial-mean tradeoff curves plus baseline markers."""
    rows = read_table(spec.input_csv,
                      ["solver", "rho", "trial", "wsr_bps_hz", "probing_dbm"])
    rows = [r for r in rows
            if r["wsr_bps_hz"] != "nan" and r.get("converged", "true") != ""]
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    for solver in sorted({r["solver"] for r in rows}):
        sub = [r for r in rows if r["solver"] == solver]
        points = []
        for rho in sorted({float(r["rho"]) for r in sub}):
            at = [r for r in sub if float(r["rho"]) == rho]
            wsr = _floats(at, "wsr_bps_hz")
            linear = 10.0 ** (_floats(at, "probing_dbm") / 10.0)
            keep = np.isfinite(wsr)
            if keep.any():
                points.append((wsr[keep].mean(),
                               10.0 * np.log10(linear[keep].mean())))
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], marker=".",
                label=solver)
    if spec.baselines_csv is not None:
        _baseline_overlays(ax, spec.baselines_csv)
    ax.set_xlabel("weighted sum rate (bps/Hz)")
    ax.set_ylabel("probing power at target (dBm)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, spec.output_path)
    return fig


RENDERERS = {
    FigureKind.BEAMPATTERN: render_beampattern,
    FigureKind.POWER_BARS: render_power_bars,
    FigureKind.TRADEOFF: render_tradeoff,
}


def render(spec: FigureSpec):
    fig = RENDERERS[spec.figure_kind](spec)
    plt.close(fig)
    return spec.output_path
