"""Reference systems for the tradeoff comparison.

Four points: a pure MIMO radar max-power beamformer, a pure multi-user
linear-precoding (MU-LP) communication system, and the two orthogonal
dual-function implementations built from them (frequency division and
time division).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (ArrayGeometry, ChannelRealization, DeploymentSpec,
                    steering_vector, wsr_shared)
from ._threads import single_thread_blas
from .sep_solver import solve_precoder_subproblem
from .wmmse import update_wg_shared


class BaselineLabel(Enum):
    FREQ_DIVISION = "freq_division"
    TIME_DIVISION = "time_division"
    PURE_RADAR = "pure_radar"
    PURE_COMM = "pure_comm"


@dataclass(frozen=True)
class BaselinePoint:
    label: BaselineLabel
    wsr: float
    probing: float
    alpha: float | None = None

    def __post_init__(self):
        if self.wsr < 0 or self.probing < 0:
            raise ValueError("wsr and probing must be >= 0")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def radar_max_power_covariance(angle: float, n_antennas: int, power: float,
                               spacing: float = 0.5) -> np.ndarray:
    """Rank-1 covariance (P/N) a a^H: maximum probing power P*N at angle."""
    a = steering_vector(angle, ArrayGeometry(n_antennas, spacing))
    return (power / n_antennas) * np.outer(a, a.conj())


@dataclass
class MulpResult:
    precoders: np.ndarray
    wsr: float
    wsr_history: np.ndarray
    n_iterations: int


def mulp_wmmse(channels: np.ndarray, power_budget: float, weights=None,
               tol: float = 1e-6, max_iters: int = 500) -> MulpResult:
    """WSR-maximizing MU-LP precoding under a total power budget.

    Plain WMMSE alternation: closed-form equalizer/weight updates and the
    ball-constrained quadratic precoder solve (no radar terms). The WSR
    trace is non-decreasing.
    """
    channels = np.asarray(channels, dtype=complex)
    n_users, n = channels.shape
    mu = np.ones(n_users) if weights is None else np.asarray(weights, float)
    ch = ChannelRealization(full_channels=channels, n_radar=0)
    norms = np.linalg.norm(channels, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    P = np.sqrt(power_budget / n_users) * (channels.T / norms)
    Z = np.zeros((n, n))
    wsr_vals = [wsr_shared(P, ch, mu)]
    with single_thread_blas():
        for _ in range(max_iters):
            state = update_wg_shared(P, ch)
            P = solve_precoder_subproblem(state, ch, Z, 1.0, mu, power_budget)
            wsr_vals.append(wsr_shared(P, ch, mu))
            if abs(wsr_vals[-1] - wsr_vals[-2]) <= tol:
                break
    return MulpResult(precoders=P, wsr=wsr_vals[-1],
                      wsr_history=np.asarray(wsr_vals),
                      n_iterations=len(wsr_vals) - 1)


def frequency_division_point(ch: ChannelRealization,
                             spec: DeploymentSpec) -> BaselinePoint:
    """Half the power to MU-LP, half to the max-power radar, disjoint bands.

    WSR is measured within the communication band; the radar band cannot
    affect it, and probing is simply (P_t/2) * N_t.
    """
    res = mulp_wmmse(ch.full_channels, spec.power_total / 2.0, spec.weights)
    probing = (spec.power_total / 2.0) * spec.n_total
    return BaselinePoint(label=BaselineLabel.FREQ_DIVISION, wsr=res.wsr,
                         probing=probing)


def time_division_point(ch: ChannelRealization, spec: DeploymentSpec,
                        alpha: float) -> BaselinePoint:
    """Fraction alpha of time as a full-power BS, 1 - alpha as MIMO radar.

    Both axes are frame averages: alpha-weighted MU-LP WSR and
    (1 - alpha)-weighted max probing power P_t * N_t.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    wsr = 0.0
    if alpha > 0.0:
        wsr = alpha * mulp_wmmse(ch.full_channels, spec.power_total,
                                 spec.weights).wsr
    probing = (1.0 - alpha) * spec.power_total * spec.n_total
    return BaselinePoint(label=BaselineLabel.TIME_DIVISION, wsr=wsr,
                         probing=probing, alpha=alpha)


def pure_radar_point(spec: DeploymentSpec) -> BaselinePoint:
    return BaselinePoint(label=BaselineLabel.PURE_RADAR, wsr=0.0,
                         probing=spec.power_total * spec.n_total)


def pure_comm_point(ch: ChannelRealization,
                    spec: DeploymentSpec) -> BaselinePoint:
    """Full-power MU-LP; probing is whatever the precoder happens to radiate."""
    res = mulp_wmmse(ch.full_channels, spec.power_total, spec.weights)
    a = steering_vector(spec.target_angle, spec.geometry)
    probing = float(np.sum(np.abs(a.conj() @ res.precoders) ** 2))
    return BaselinePoint(label=BaselineLabel.PURE_COMM, wsr=res.wsr,
                         probing=probing)
