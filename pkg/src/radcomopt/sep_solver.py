"""Alternating optimization for the separated deployment.

Given fixed MSE weights and equalizers, the regularized surrogate separates
into two independent convex blocks that are solved exactly:

* precoder block: a quadratic with a total-power ball constraint, solved in
  closed form after one Hermitian eigendecomposition plus a bisection on the
  power constraint's dual variable;
* radar covariance block: a linear objective over the Hermitian matrices
  with fixed diagonal and a PSD constraint, solved by ADMM alternating a
  diagonal-pinning step with a PSD cone projection.

This removes any dependence on a general-purpose SDP solver while keeping
each block minimization exact, so the surrogate objective is monotone
non-increasing across outer iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from ._threads import single_thread_blas
from .model import (ChannelRealization, DeploymentSpec, check_precoder,
                    check_radar_covariance, split_steering, wsr_separated,
                    wsr_shared)
from .wmmse import (LN2, WmmseState, surrogate_objective_separated,
                    update_wg_separated, update_wg_shared)


class InitStrategy(Enum):
    MRT = "mrt"
    RANDOM_GAUSSIAN = "random_gaussian"
    PROVIDED = "provided"
    # WSR-only warm start: MU-LP precoder plus an interference-avoiding
    # covariance; protects weak users from the radar-dump lockout that the
    # MRT/isotropic start can fall into at large rho
    MULP = "mulp"


class StopCriterion(Enum):
    OBJECTIVE = "objective"   # change of the full regularized surrogate
    WSR = "wsr"               # literal WSR-change stopping


@dataclass
class SepSolverConfig:
    rho: float = 1.0
    eps_outer: float = 1e-4
    admm_penalty: float = 1.0
    admm_tol: float = 1e-6
    admm_max_iters: int = 5000
    bisection_tol: float = 1e-8
    outer_max_iters: int = 300
    init_strategy: InitStrategy = InitStrategy.MRT
    stop_on: StopCriterion = StopCriterion.OBJECTIVE
    init_seed: int = 0
    init_precoder: np.ndarray | None = None
    init_covariance: np.ndarray | None = None

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        for name in ("eps_outer", "admm_penalty", "admm_tol", "bisection_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


class AdmmError(RuntimeError):
    """Covariance ADMM failed to reach its residual tolerance."""

    def __init__(self, n_iters, primal_residual, dual_residual):
        self.n_iters = n_iters
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
        super().__init__(
            f"ADMM did not converge in {n_iters} iterations "
            f"(primal {primal_residual:.3e}, dual {dual_residual:.3e})")


@dataclass
class CovarianceResult:
    covariance: np.ndarray
    n_iterations: int
    primal_residual: float
    dual_residual: float
    warm: tuple


@dataclass
class SepSolution:
    precoders: np.ndarray
    covariance: np.ndarray
    state: WmmseState
    objective_history: np.ndarray
    wsr_history: np.ndarray
    n_iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def build_Z(target_angle: float, spec: DeploymentSpec) -> np.ndarray:
    """Convexifier N_tc I - a2 a2^H of the comm probing reward (PSD)."""
    spec_angle = spec
    if target_angle != spec.target_angle:
        spec_angle = DeploymentSpec(
            kind=spec.kind, n_total=spec.n_total, n_users=spec.n_users,
            power_total=spec.power_total, target_angle=target_angle,
            spacing=spec.spacing, n_radar=spec.n_radar, n_comm=spec.n_comm,
            power_radar=spec.power_radar, power_comm=spec.power_comm,
            rate_weights=spec.rate_weights)
    _, a2 = split_steering(spec_angle)
    return spec.n_comm * np.eye(spec.n_comm) - np.outer(a2, a2.conj())


def _steering_from_Z(Z: np.ndarray) -> np.ndarray:
    """Recover a2 (up to a global phase) from N_tc I - a2 a2^H."""
    n = Z.shape[0]
    col = (n * np.eye(n) - Z)[:, 0]
    return col * (np.sqrt(n) / np.linalg.norm(col))


def solve_precoder_subproblem(state: WmmseState, ch: ChannelRealization,
                              Z: np.ndarray, rho: float, weights,
                              power_budget: float,
                              tol: float = 1e-8) -> np.ndarray:
    """Exact minimizer of the precoder block under trace(P P^H) <= budget.

    Columns are p_k = (G + lam I)^{-1} rho mu_k w_k conj(g_k) h_k with
    G = rho sum_i mu_i w_i |g_i|^2 h_i h_i^H + Z and lam >= 0 chosen by
    bisection so the power constraint holds with complementary slackness.

    With rho = 0 (or an all-zero linear term) every column in the null space
    of Z is optimal; the deterministic representative puts the whole budget
    on the first column along the recovered steering direction.
    """
    if not np.all(np.isfinite(state.weights)) or \
            not np.all(np.isfinite(state.equalizers)):
        raise ValueError("non-finite WMMSE state")
    mu = np.asarray(weights, dtype=float)
    channels = ch.comm_part
    n_users, n = channels.shape
    coeff = rho * mu * state.weights
    G = Z.astype(complex).copy()
    for i in range(n_users):
        G += coeff[i] * np.abs(state.equalizers[i]) ** 2 \
            * np.outer(channels[i], channels[i].conj())
    C = (channels * (coeff * state.equalizers.conj())[:, None]).T
    if not np.all(np.isfinite(G)) or not np.all(np.isfinite(C)):
        raise ValueError("non-finite subproblem data")
    norm_c = float(np.linalg.norm(C))
    if rho == 0.0 or norm_c == 0.0:
        direction = _steering_from_Z(Z)
        P = np.zeros((n, n_users), dtype=complex)
        P[:, 0] = np.sqrt(power_budget) * direction / np.linalg.norm(direction)
        return P

    evals, V = np.linalg.eigh(0.5 * (G + G.conj().T))
    Ct = V.conj().T @ C
    Ct2 = np.abs(Ct) ** 2

    def power(lam):
        return float(np.sum(Ct2 / (evals[:, None] + lam) ** 2))

    lam = 0.0
    if evals[0] <= 1e-12 * max(1.0, evals[-1]) or power(0.0) > power_budget:
        lo, hi = 0.0, norm_c / np.sqrt(power_budget)
        while power(hi) > power_budget:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if power(mid) > power_budget:
                lo = mid
            else:
                hi = mid
            if (hi - lo) <= 1e-15 * max(1.0, hi) and \
                    abs(power(hi) - power_budget) <= tol * max(1.0, power_budget):
                break
        lam = hi
    return V @ (Ct / (evals[:, None] + lam))


def interference_cost_matrix(state: WmmseState, ch: ChannelRealization,
                             rho: float, weights, a1: np.ndarray) -> np.ndarray:
    """Hermitian cost B = rho sum_k mu_k w_k |g_k|^2 f_k f_k^H - a1 a1^H."""
    mu = np.asarray(weights, dtype=float)
    radar_ch = ch.radar_part
    B = -np.outer(a1, a1.conj()).astype(complex)
    coeff = rho * mu * state.weights * np.abs(state.equalizers) ** 2
    for k in range(radar_ch.shape[0]):
        B += coeff[k] * np.outer(radar_ch[k], radar_ch[k].conj())
    return 0.5 * (B + B.conj().T)


def minimize_linear_fixed_diag_psd(B: np.ndarray, diag_value: float,
                                   penalty: float = 1.0, tol: float = 1e-6,
                                   max_iters: int = 5000,
                                   warm=None) -> CovarianceResult:
    """min tr(B X) over {X Hermitian, diag(X) = diag_value, X >= 0} via ADMM.

    The objective is scale invariant, so B is normalised to Frobenius norm
    diag_value * n before splitting; this keeps the ADMM step size matched
    to the feasible set for any rho. The converged point is Hermitized, its
    diagonal re-pinned, and blended toward the strictly feasible matrix
    diag_value * I when roundoff leaves a tiny negative eigenvalue.
    """
    n = B.shape[0]
    norm_b = float(np.linalg.norm(B))
    if norm_b == 0.0:
        cov = diag_value * np.eye(n, dtype=complex)
        return CovarianceResult(cov, 0, 0.0, 0.0,
                                (cov.copy(), np.zeros((n, n), dtype=complex)))
    Bn = B * (diag_value * n / norm_b)
    if warm is None:
        Y0 = diag_value * np.eye(n, dtype=complex)
        U0 = np.zeros((n, n), dtype=complex)
    else:
        Y0, U0 = warm
    X, Y, U, n_iters, r, s, converged = _kernels.admm_linear_fixed_diag(
        Bn, diag_value, penalty, tol, max_iters, Y0, U0)
    if not converged:
        raise AdmmError(n_iters, r, s)
    M = 0.25 * (X + X.conj().T + Y + Y.conj().T)
    np.fill_diagonal(M, diag_value)
    min_eig = float(np.linalg.eigvalsh(M)[0])
    if min_eig < 0.0:
        beta = -min_eig / (-min_eig + diag_value) * (1.0 + 1e-9)
        M = (1.0 - beta) * M + beta * diag_value * np.eye(n)
        np.fill_diagonal(M, diag_value)
    return CovarianceResult(M, n_iters, r, s, (Y, U))


def solve_covariance_subproblem(state: WmmseState, ch: ChannelRealization,
                                rho: float, weights, target_angle: float,
                                power_radar: float, spacing: float = 0.5,
                                penalty: float = 1.0, tol: float = 1e-6,
                                max_iters: int = 5000,
                                warm=None) -> CovarianceResult:
    """Radar covariance block: min tr(B R) with fixed diagonal, R >= 0."""
    n_radar = ch.n_radar
    a1 = np.exp(2j * np.pi * spacing * np.arange(n_radar)
                * np.sin(target_angle))
    B = interference_cost_matrix(state, ch, rho, weights, a1)
    return minimize_linear_fixed_diag_psd(B, power_radar / n_radar,
                                          penalty=penalty, tol=tol,
                                          max_iters=max_iters, warm=warm)


def _wsr_only_precoder(ch, spec, weights, tol=1e-6, max_iters=200):
    """Plain WMMSE precoder on the comm sub-array, no radar terms."""
    channels = ch.comm_part
    n_users, n_comm = channels.shape
    comm_only = ChannelRealization(full_channels=channels, n_radar=0)
    norms = np.linalg.norm(channels, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    P = np.sqrt(spec.power_comm / n_users) * (channels.T / norms)
    Z = np.zeros((n_comm, n_comm))
    prev = wsr_shared(P, comm_only, weights)
    for _ in range(max_iters):
        state = update_wg_shared(P, comm_only)
        P = solve_precoder_subproblem(state, comm_only, Z, 1.0, weights,
                                      spec.power_comm)
        wsr = wsr_shared(P, comm_only, weights)
        if abs(wsr - prev) <= tol:
            break
        prev = wsr
    return P


def _interference_avoiding_covariance(ch, spec, weights):
    """Feasible covariance minimizing the weighted user leakage.

    Starting-point accuracy is uncritical; fall back to the isotropic
    covariance if the minimizer crawls on a degenerate face.
    """
    radar_ch = ch.radar_part
    B = np.zeros((spec.n_radar, spec.n_radar), dtype=complex)
    for k in range(radar_ch.shape[0]):
        B += weights[k] * np.outer(radar_ch[k], radar_ch[k].conj())
    try:
        return minimize_linear_fixed_diag_psd(
            B, spec.radar_elemental_power, tol=1e-6).covariance
    except AdmmError:
        return spec.radar_elemental_power * np.eye(spec.n_radar,
                                                   dtype=complex)


def _initial_point(ch, spec, config):
    n_users, n_comm = ch.comm_part.shape
    d0 = spec.radar_elemental_power
    if config.init_strategy is InitStrategy.MULP:
        return (_wsr_only_precoder(ch, spec, spec.weights),
                _interference_avoiding_covariance(ch, spec, spec.weights))
    if config.init_strategy is InitStrategy.PROVIDED:
        if config.init_precoder is None:
            raise ValueError("init_strategy=PROVIDED needs init_precoder")
        P = np.array(config.init_precoder, dtype=complex)
        R = (np.array(config.init_covariance, dtype=complex)
             if config.init_covariance is not None
             else d0 * np.eye(spec.n_radar, dtype=complex))
        return P, R
    if config.init_strategy is InitStrategy.RANDOM_GAUSSIAN:
        rng = np.random.default_rng(config.init_seed)
        P = rng.standard_normal((n_comm, n_users)) \
            + 1j * rng.standard_normal((n_comm, n_users))
        P *= np.sqrt(spec.power_comm) / np.linalg.norm(P)
        return P, d0 * np.eye(spec.n_radar, dtype=complex)
    norms = np.linalg.norm(ch.comm_part, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    P = np.sqrt(spec.power_comm / n_users) * (ch.comm_part.T / norms)
    return P, d0 * np.eye(spec.n_radar, dtype=complex)


def run_wmmse_sdp(ch: ChannelRealization, spec: DeploymentSpec,
                  config: SepSolverConfig) -> SepSolution:
    """Alternate (w, g) updates with the two exact block solves.

    Stops when the configured criterion changes by at most eps_outer
    (the objective criterion is scaled by max(1, |objective|) so the same
    tolerance works across the whole rho range).
    """
    mu = spec.weights
    a1, _ = split_steering(spec)
    Z = build_Z(spec.target_angle, spec)
    P, R = _initial_point(ch, spec, config)
    with single_thread_blas():
        return _run_wmmse_sdp_loop(ch, spec, config, mu, a1, Z, P, R)


def _run_wmmse_sdp_loop(ch, spec, config, mu, a1, Z, P, R):
    warm = None
    objective, wsr_vals, admm_iters = [], [], []
    converged = False
    state = None
    # the surrogate's quadratic coefficients carry w_k / ln2, so the
    # paper-form blocks see an effective regularizer rho / ln2
    rho_eff = config.rho / LN2
    for t in range(config.outer_max_iters):
        state = update_wg_separated(P, R, ch)
        try:
            P_new = solve_precoder_subproblem(state, ch, Z, rho_eff, mu,
                                              spec.power_comm,
                                              tol=config.bisection_tol)
            try:
                cov = solve_covariance_subproblem(
                    state, ch, rho_eff, mu, spec.target_angle,
                    spec.power_radar, spacing=spec.spacing,
                    penalty=config.admm_penalty, tol=config.admm_tol,
                    max_iters=config.admm_max_iters, warm=warm)
            except AdmmError:
                # a stale warm start can crawl; one cold restart
                cov = solve_covariance_subproblem(
                    state, ch, rho_eff, mu, spec.target_angle,
                    spec.power_radar, spacing=spec.spacing,
                    penalty=config.admm_penalty, tol=config.admm_tol,
                    max_iters=config.admm_max_iters, warm=None)
        except (AdmmError, ValueError) as exc:
            raise RuntimeError(f"subproblem failed at outer iteration {t}") from exc
        warm = cov.warm
        admm_iters.append(cov.n_iterations)
        # exact block minimizations can only improve; guard against the
        # finite ADMM tolerance re-increasing the surrogate
        if surrogate_objective_separated(P_new, R, state, ch, config.rho, mu,
                                         spec).value <= \
                surrogate_objective_separated(P, R, state, ch, config.rho, mu,
                                              spec).value:
            P = P_new
        B = interference_cost_matrix(state, ch, rho_eff, mu, a1)
        if np.trace(B @ cov.covariance).real <= np.trace(B @ R).real:
            R = cov.covariance
        objective.append(surrogate_objective_separated(
            P, R, state, ch, config.rho, mu, spec).value)
        wsr_vals.append(wsr_separated(P, R, ch, mu))
        if t > 0:
            if config.stop_on is StopCriterion.OBJECTIVE:
                done = abs(objective[-1] - objective[-2]) <= \
                    config.eps_outer * max(1.0, abs(objective[-2]))
            else:
                done = abs(wsr_vals[-1] - wsr_vals[-2]) <= config.eps_outer
            if done:
                converged = True
                break
    check_precoder(P, spec)
    check_radar_covariance(R, spec)
    return SepSolution(precoders=P, covariance=R, state=state,
                       objective_history=np.asarray(objective),
                       wsr_history=np.asarray(wsr_vals),
                       n_iterations=len(objective), converged=converged,
                       diagnostics={"admm_iterations": admm_iters})
