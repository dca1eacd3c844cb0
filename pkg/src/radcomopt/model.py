"""System geometry, channel generation and performance metrics.

Covers both antenna deployments of the dual-function platform:

* separated: the array is split into a radar sub-array (first ``n_radar``
  elements, transmitting a probing signal with covariance ``R_x``) and a
  communication sub-array (last ``n_comm`` elements, transmitting precoded
  user streams).
* shared: all antennas transmit precoded communication streams and the
  precoder doubles as the radar beamformer.

Noise power at every user is fixed to 1, so all powers in this package are
noise-normalised linear units (0 dBm = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

NOISE_POWER = 1.0


class Deployment(Enum):
    SEPARATED = "separated"
    SHARED = "shared"


def dbm_to_linear(dbm: float) -> float:
    return float(10.0 ** (dbm / 10.0))


def linear_to_dbm(linear: float) -> float:
    return float(10.0 * np.log10(linear))


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in wavelengths."""

    n_antennas: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ValueError(f"n_antennas must be >= 1, got {self.n_antennas}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")


@dataclass(frozen=True)
class DeploymentSpec:
    """Platform configuration: antenna counts, power budgets, users, target.

    ``target_angle`` is in radians; use the constructors for degree input.
    For a separated deployment the radar/communication split must be exact:
    ``n_radar + n_comm == n_total`` and ``power_radar + power_comm ==
    power_total``.
    """

    kind: Deployment
    n_total: int
    n_users: int
    power_total: float
    target_angle: float = 0.0
    spacing: float = 0.5
    n_radar: int = 0
    n_comm: int = 0
    power_radar: float = 0.0
    power_comm: float = 0.0
    rate_weights: tuple = ()

    def __post_init__(self):
        if self.n_total < 1 or self.n_users < 1:
            raise ValueError("n_total and n_users must be >= 1")
        if self.power_total <= 0:
            raise ValueError(f"power_total must be > 0, got {self.power_total}")
        if not self.rate_weights:
            object.__setattr__(self, "rate_weights", (1.0,) * self.n_users)
        if len(self.rate_weights) != self.n_users:
            raise ValueError("rate_weights must have one entry per user")
        if any(w <= 0 for w in self.rate_weights):
            raise ValueError("rate_weights must all be > 0")
        if self.kind is Deployment.SEPARATED:
            if self.n_radar + self.n_comm != self.n_total:
                raise ValueError("n_radar + n_comm must equal n_total")
            if self.n_radar < 1 or self.n_comm < 1:
                raise ValueError("separated deployment needs both sub-arrays")
            if self.power_radar <= 0 or self.power_comm <= 0:
                raise ValueError("sub-array powers must be > 0")
            if not np.isclose(self.power_radar + self.power_comm,
                              self.power_total, rtol=1e-12):
                raise ValueError("power_radar + power_comm must equal power_total")

    @classmethod
    def separated(cls, n_total=16, n_users=4, power_total=100.0,
                  target_angle_deg=0.0, spacing=0.5, n_radar=None,
                  power_radar=None, rate_weights=()):
        """Separated deployment; defaults to the even radar/comm split."""
        if n_radar is None:
            n_radar = n_total // 2
        if power_radar is None:
            power_radar = power_total / 2.0
        return cls(kind=Deployment.SEPARATED, n_total=n_total, n_users=n_users,
                   power_total=power_total,
                   target_angle=float(np.deg2rad(target_angle_deg)),
                   spacing=spacing, n_radar=n_radar, n_comm=n_total - n_radar,
                   power_radar=power_radar, power_comm=power_total - power_radar,
                   rate_weights=tuple(rate_weights))

    @classmethod
    def shared(cls, n_total=16, n_users=4, power_total=100.0,
               target_angle_deg=0.0, spacing=0.5, rate_weights=()):
        return cls(kind=Deployment.SHARED, n_total=n_total, n_users=n_users,
                   power_total=power_total,
                   target_angle=float(np.deg2rad(target_angle_deg)),
                   spacing=spacing, rate_weights=tuple(rate_weights))

    def as_shared(self):
        """Shared-deployment view with the same totals, users and target."""
        if self.kind is Deployment.SHARED:
            return self
        return DeploymentSpec(kind=Deployment.SHARED, n_total=self.n_total,
                              n_users=self.n_users, power_total=self.power_total,
                              target_angle=self.target_angle, spacing=self.spacing,
                              rate_weights=self.rate_weights)

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.n_total, self.spacing)

    @property
    def radar_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.n_radar, self.spacing)

    @property
    def elemental_power(self) -> float:
        """Per-antenna power P_t / N_t of the shared deployment."""
        return self.power_total / self.n_total

    @property
    def radar_elemental_power(self) -> float:
        """Fixed diagonal value P_r / N_tr of the radar covariance."""
        return self.power_radar / self.n_radar

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.rate_weights, dtype=float)


@dataclass(frozen=True)
class ChannelRealization:
    """Downlink channels of all K users, one row per user.

    ``full_channels`` has shape (K, n_total). For the separated deployment
    the first ``n_radar`` entries of each row are the radar-to-user channel
    and the remaining entries the comm-to-user channel, so the shared and
    separated simulations see the same propagation environment.
    """

    full_channels: np.ndarray
    n_radar: int
    noise_power: float = NOISE_POWER

    def __post_init__(self):
        arr = np.asarray(self.full_channels, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "full_channels", arr)
        if not 0 <= self.n_radar <= arr.shape[1]:
            raise ValueError("n_radar out of range")

    @property
    def n_users(self) -> int:
        return self.full_channels.shape[0]

    @property
    def n_total(self) -> int:
        return self.full_channels.shape[1]

    @property
    def radar_part(self) -> np.ndarray:
        return self.full_channels[:, :self.n_radar]

    @property
    def comm_part(self) -> np.ndarray:
        return self.full_channels[:, self.n_radar:]


def sample_channels(spec: DeploymentSpec, seed) -> ChannelRealization:
    """Draw i.i.d. circularly-symmetric complex normal channels, unit variance.

    Deterministic for a given seed; distinct seeds give independent streams.
    """
    rng = np.random.default_rng(seed)
    shape = (spec.n_users, spec.n_total)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    n_radar = spec.n_radar if spec.kind is Deployment.SEPARATED else 0
    return ChannelRealization(full_channels=h, n_radar=n_radar)


def steering_vector(angle: float, geometry: ArrayGeometry) -> np.ndarray:
    """ULA transmit steering vector, entry n = exp(j 2 pi n delta sin(angle))."""
    n = np.arange(geometry.n_antennas)
    return np.exp(2j * np.pi * geometry.spacing * n * np.sin(angle))


def split_steering(spec: DeploymentSpec):
    """Full-array steering vector at the target split into (a1, a2)."""
    a = steering_vector(spec.target_angle, spec.geometry)
    return a[:spec.n_radar], a[spec.n_radar:]


def _quadratic_form(v: np.ndarray, m: np.ndarray) -> float:
    """v^H m v for Hermitian m, asserting a negligible imaginary residue."""
    val = complex(np.vdot(v, m @ v))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"quadratic form has imaginary residue {val.imag:.3e}")
    return val.real


def _sinr_terms(channels: np.ndarray, precoders: np.ndarray,
                extra_interference=None):
    """Per-user (signal, interference+noise) from h_k^H p_j cross terms."""
    if channels.shape[1] != precoders.shape[0]:
        raise ValueError(
            f"channel dim {channels.shape[1]} != precoder dim {precoders.shape[0]}")
    if channels.shape[0] != precoders.shape[1]:
        raise ValueError("need one precoder column per user")
    cross = channels.conj() @ precoders          # [k, j] = h_k^H p_j
    signal = np.abs(np.diag(cross)) ** 2
    denom = np.sum(np.abs(cross) ** 2, axis=1) - signal + NOISE_POWER
    if extra_interference is not None:
        denom = denom + extra_interference
    return signal, denom


def radar_interference(radar_channels: np.ndarray,
                       covariance: np.ndarray) -> np.ndarray:
    """Per-user radar leakage power f_k^H R_x f_k (real, >= 0)."""
    vals = np.einsum("ki,ij,kj->k", radar_channels.conj(), covariance,
                     radar_channels)
    return np.real(vals)


def sinr_separated(precoders, covariance, ch: ChannelRealization) -> np.ndarray:
    extra = radar_interference(ch.radar_part, covariance)
    signal, denom = _sinr_terms(ch.comm_part, precoders, extra)
    return signal / denom


def sinr_shared(precoders, ch: ChannelRealization) -> np.ndarray:
    signal, denom = _sinr_terms(ch.full_channels, precoders)
    return signal / denom


def _wsr(sinr: np.ndarray, weights) -> float:
    w = np.ones(len(sinr)) if weights is None else np.asarray(weights, float)
    if len(w) != len(sinr):
        raise ValueError("one rate weight per user required")
    return float(w @ np.log2(1.0 + sinr))


def wsr_separated(precoders, covariance, ch: ChannelRealization,
                  weights=None) -> float:
    """Weighted sum rate with radar interference, bps/Hz."""
    return _wsr(sinr_separated(precoders, covariance, ch), weights)


def wsr_shared(precoders, ch: ChannelRealization, weights=None) -> float:
    """Weighted sum rate of the shared deployment (no radar interference)."""
    return _wsr(sinr_shared(precoders, ch), weights)


def probing_power_separated(precoders, covariance,
                            spec: DeploymentSpec) -> float:
    """Power radiated toward the target: a1^H R_x a1 + a2^H P P^H a2."""
    a1, a2 = split_steering(spec)
    if covariance.shape != (spec.n_radar, spec.n_radar):
        raise ValueError("covariance does not match the radar sub-array")
    if precoders.shape[0] != spec.n_comm:
        raise ValueError("precoder does not match the comm sub-array")
    radar = _quadratic_form(a1, covariance)
    comm = float(np.sum(np.abs(a2.conj() @ precoders) ** 2))
    return radar + comm


def probing_power_shared(precoders, spec: DeploymentSpec) -> float:
    """Power radiated toward the target by the shared precoder."""
    a = steering_vector(spec.target_angle, spec.geometry)
    if precoders.shape[0] != spec.n_total:
        raise ValueError("precoder does not match the array")
    return float(np.sum(np.abs(a.conj() @ precoders) ** 2))


def transmit_covariance_separated(precoders, covariance) -> np.ndarray:
    """Block-diagonal overall transmit covariance [R_x, 0; 0, P P^H]."""
    n_r = covariance.shape[0]
    n_c = precoders.shape[0]
    c = np.zeros((n_r + n_c, n_r + n_c), dtype=complex)
    c[:n_r, :n_r] = covariance
    c[n_r:, n_r:] = precoders @ precoders.conj().T
    return c


def beampattern(covariance: np.ndarray, geometry: ArrayGeometry,
                angles) -> np.ndarray:
    """Transmit beampattern a(theta)^H C a(theta) in dB over an angle grid.

    ``angles`` are radians. The covariance must be Hermitian (PSD up to a
    small negative eigenvalue tolerance); linear values are floored before
    the dB conversion so exact zeros stay finite.
    """
    c = np.asarray(covariance)
    if c.shape[0] != c.shape[1] or c.shape[0] != geometry.n_antennas:
        raise ValueError("covariance shape does not match the array")
    scale = max(1.0, float(np.abs(c).max()))
    if np.abs(c - c.conj().T).max() > 1e-8 * scale:
        raise ValueError("covariance is not Hermitian")
    if np.linalg.eigvalsh(c)[0] < -1e-8 * scale:
        raise ValueError("covariance is not positive semidefinite")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    steer = np.exp(2j * np.pi * geometry.spacing
                   * np.outer(np.arange(geometry.n_antennas), np.sin(angles)))
    linear = np.real(np.einsum("nm,nk,km->m", steer.conj(), c, steer))
    return 10.0 * np.log10(np.maximum(linear, 1e-300))


def check_radar_covariance(covariance, spec: DeploymentSpec,
                           diag_tol=1e-6, eig_tol=1e-8):
    """Validate Hermitian symmetry, PSD-ness and the fixed diagonal."""
    herm = np.abs(covariance - covariance.conj().T).max()
    if herm > 1e-10:
        raise ValueError(f"covariance not Hermitian: residual {herm:.3e}")
    min_eig = float(np.linalg.eigvalsh(covariance)[0])
    if min_eig < -eig_tol:
        raise ValueError(f"covariance indefinite: min eigenvalue {min_eig:.3e}")
    dev = np.abs(np.diag(covariance) - spec.radar_elemental_power).max()
    if dev > diag_tol:
        raise ValueError(f"covariance diagonal off by {dev:.3e}")


def check_precoder(precoders, spec: DeploymentSpec, tol=1e-8):
    """Validate the deployment's power constraint on a precoder matrix."""
    if spec.kind is Deployment.SEPARATED:
        total = float(np.sum(np.abs(precoders) ** 2))
        if total > spec.power_comm + tol:
            raise ValueError(f"precoder power {total} exceeds {spec.power_comm}")
    else:
        row_power = np.sum(np.abs(precoders) ** 2, axis=1)
        dev = np.abs(row_power - spec.elemental_power).max()
        if dev > tol:
            raise ValueError(f"per-antenna power off by {dev:.3e}")
