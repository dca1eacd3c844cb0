"""Majorization-minimization solver for the shared deployment.

The per-antenna equality constraint diag(P P^H) = P_t/N_t is non-convex, so
the precoder block is handled by MM on the vectorized precoder p = vec(P):
the quadratic surrogate objective p^H Q p - 2 Re{p^H q} is majorized with
lambda_max(Q) I, which reduces every step to maximizing Re{p^H qhat} under
fixed row norms, solved in closed form by rescaling each antenna row of the
matrix form of qhat. Every iterate therefore satisfies the power constraint
exactly, and the surrogate descends monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from ._threads import single_thread_blas
from .model import (ChannelRealization, DeploymentSpec, check_precoder,
                    steering_vector, wsr_shared)
from .wmmse import (LN2, WmmseState, surrogate_objective_shared,
                    update_wg_shared)


class SpectralMethod(Enum):
    EXACT_EIGEN = "exact_eigen"
    GERSHGORIN = "gershgorin"


class MmStopCriterion(Enum):
    OBJECTIVE = "objective"
    WSR = "wsr"


@dataclass
class MmConfig:
    eps_inner: float = 1e-6
    inner_max_iters: int = 2000
    eps_outer: float = 1e-4
    outer_max_iters: int = 300
    spectral_method: SpectralMethod = SpectralMethod.EXACT_EIGEN
    stop_on: MmStopCriterion = MmStopCriterion.OBJECTIVE
    init_precoder: np.ndarray | None = None

    def __post_init__(self):
        if self.eps_inner <= 0 or self.eps_outer <= 0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True)
class QuadraticModel:
    """f(p) = p^H Q p - 2 Re{p^H q} + constant on the power sphere.

    Q absorbs the p-independent WMMSE terms through (c / P_t) I using
    ||p||^2 = P_t, so f equals the deployment surrogate for every p of total
    power P_t.
    """

    Q: np.ndarray
    q: np.ndarray
    constant: float


@dataclass
class MmInnerResult:
    p_v: np.ndarray
    n_iterations: int
    converged: bool
    objective_history: np.ndarray
    degenerate_events: int


@dataclass
class SharedSolution:
    precoders: np.ndarray
    state: WmmseState
    objective_history: np.ndarray
    wsr_history: np.ndarray
    row_power_error_history: np.ndarray
    n_iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def vectorize(precoders: np.ndarray) -> np.ndarray:
    """Stack precoder columns into a single vector."""
    return np.asarray(precoders).flatten(order="F")


def devectorize(p_v: np.ndarray, n_users: int, n_antennas: int) -> np.ndarray:
    return np.asarray(p_v).reshape((n_antennas, n_users), order="F")


def selector_matrix(k: int, n_users: int, n_antennas: int) -> np.ndarray:
    """Block selector extracting column k from the stacked precoder."""
    D = np.zeros((n_antennas, n_users * n_antennas))
    D[:, k * n_antennas:(k + 1) * n_antennas] = np.eye(n_antennas)
    return D


def assemble_quadratic_model(state: WmmseState, ch: ChannelRealization,
                             rho: float, weights,
                             spec: DeploymentSpec) -> QuadraticModel:
    """Quadratic form of the shared surrogate in the stacked precoder.

    The per-user WMMSE quadratic and the (negated) probing quadratic are
    block diagonal, one identical block per user column.
    """
    mu = np.asarray(weights, dtype=float)
    channels = ch.full_channels
    n_users, n_t = channels.shape
    if len(mu) != n_users:
        raise ValueError("one weight per user required")
    a = steering_vector(spec.target_angle, spec.geometry)
    coeff = (rho / LN2) * mu * state.weights
    S = -np.outer(a, a.conj()).astype(complex)
    for k in range(n_users):
        S += coeff[k] * np.abs(state.equalizers[k]) ** 2 \
            * np.outer(channels[k], channels[k].conj())
    absorbed = float(np.sum(coeff * (np.abs(state.equalizers) ** 2 + 1.0)))
    Q = np.kron(np.eye(n_users), S)
    Q += (absorbed / spec.power_total) * np.eye(n_users * n_t)
    q = (channels * (coeff * state.equalizers.conj())[:, None]).reshape(-1)
    constant = rho * float(
        mu @ (1.0 - (1.0 + np.log(state.weights)) / LN2))
    return QuadraticModel(Q=0.5 * (Q + Q.conj().T), q=q, constant=constant)


def spectral_bound(Q: np.ndarray,
                   method: SpectralMethod = SpectralMethod.EXACT_EIGEN) -> float:
    """Largest eigenvalue of Hermitian Q, or a Gershgorin upper bound."""
    if method is SpectralMethod.EXACT_EIGEN:
        return float(np.linalg.eigvalsh(Q)[-1])
    radii = np.sum(np.abs(Q), axis=1) - np.abs(np.diag(Q))
    return float(np.max(np.real(np.diag(Q)) + radii))


def mm_update(p_v: np.ndarray, model: QuadraticModel, lam_max: float,
              spec: DeploymentSpec) -> np.ndarray:
    """One MM step: rescale every antenna row of qhat = q - (Q - lam I) p.

    The output rows have squared norm P_t/N_t exactly; a zero row of qhat
    keeps its previous value (any feasible row attains the same surrogate
    value there).
    """
    n_t = spec.n_total
    n_users = len(p_v) // n_t
    row_target = float(np.sqrt(spec.elemental_power))
    p_next, _, _, _, _ = _kernels.fallback.mm_inner(
        model.Q, model.q, p_v, n_t, n_users, lam_max, row_target,
        -1.0, 1)
    return p_next


def run_mm_inner(p_v0: np.ndarray, model: QuadraticModel,
                 spec: DeploymentSpec, config: MmConfig) -> MmInnerResult:
    """Iterate MM steps until the precoder change drops below eps_inner.

    ``objective_history`` records the surrogate value at every visited
    point (monotone non-increasing up to roundoff).
    """
    n_t = spec.n_total
    n_users = len(p_v0) // n_t
    lam = spectral_bound(model.Q, config.spectral_method)
    row_target = float(np.sqrt(spec.elemental_power))
    p_v, f_hist, n_iters, converged, degenerate = _kernels.mm_inner(
        model.Q, model.q, p_v0, n_t, n_users, lam, row_target,
        config.eps_inner, config.inner_max_iters)
    return MmInnerResult(p_v=p_v, n_iterations=n_iters, converged=converged,
                         objective_history=f_hist + model.constant,
                         degenerate_events=degenerate)


def _initial_precoder(ch: ChannelRealization, spec: DeploymentSpec,
                      config: MmConfig) -> np.ndarray:
    if config.init_precoder is not None:
        P = np.array(config.init_precoder, dtype=complex)
    else:
        norms = np.linalg.norm(ch.full_channels, axis=1)
        norms = np.where(norms == 0.0, 1.0, norms)
        P = np.sqrt(spec.power_total / spec.n_users) \
            * (ch.full_channels.T / norms)
    # land on the per-antenna constraint set with one row renormalization
    row_target = np.sqrt(spec.elemental_power)
    row_norms = np.linalg.norm(P, axis=1)
    zero = row_norms == 0.0
    if zero.any():
        P[zero] = np.sqrt(spec.elemental_power / spec.n_users)
        row_norms = np.linalg.norm(P, axis=1)
    return P * (row_target / row_norms)[:, None]


def run_wmmse_mm(ch: ChannelRealization, spec: DeploymentSpec,
                 config: MmConfig, rho: float,
                 weights=None) -> SharedSolution:
    """Alternate closed-form (w, g) updates with the MM precoder block."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    mu = spec.weights if weights is None else np.asarray(weights, dtype=float)
    spec_shared = spec.as_shared()
    P = _initial_precoder(ch, spec_shared, config)
    with single_thread_blas():
        return _run_wmmse_mm_loop(ch, spec_shared, config, rho, mu, P)


def _run_wmmse_mm_loop(ch, spec_shared, config, rho, mu, P):
    n_users, n_t = ch.full_channels.shape
    objective, wsr_vals, row_err, inner_iters = [], [], [], []
    degenerate_total = 0
    converged = False
    state = None
    for t in range(config.outer_max_iters):
        state = update_wg_shared(P, ch)
        model = assemble_quadratic_model(state, ch, rho, mu, spec_shared)
        try:
            inner = run_mm_inner(vectorize(P), model, spec_shared, config)
        except ValueError as exc:
            raise RuntimeError(f"MM inner loop failed at outer iteration {t}") \
                from exc
        P = devectorize(inner.p_v, n_users, n_t)
        inner_iters.append(inner.n_iterations)
        degenerate_total += inner.degenerate_events
        objective.append(surrogate_objective_shared(
            P, state, ch, rho, mu, spec_shared).value)
        wsr_vals.append(wsr_shared(P, ch, mu))
        row_err.append(float(np.abs(np.sum(np.abs(P) ** 2, axis=1)
                                    - spec_shared.elemental_power).max()))
        if t > 0:
            if config.stop_on is MmStopCriterion.OBJECTIVE:
                done = abs(objective[-1] - objective[-2]) <= \
                    config.eps_outer * max(1.0, abs(objective[-2]))
            else:
                done = abs(wsr_vals[-1] - wsr_vals[-2]) <= config.eps_outer
            if done:
                converged = True
                break
    check_precoder(P, spec_shared, tol=1e-10)
    return SharedSolution(precoders=P, state=state,
                          objective_history=np.asarray(objective),
                          wsr_history=np.asarray(wsr_vals),
                          row_power_error_history=np.asarray(row_err),
                          n_iterations=len(objective), converged=converged,
                          diagnostics={"inner_iterations": inner_iters,
                                       "degenerate_rows": degenerate_total})
