"""Rate-WMMSE machinery shared by both deployment solvers.

Maximising the weighted sum rate is equivalent to minimising a weighted sum
of augmented per-user WMSEs

    xi_k = (w_k e_k - ln(w_k) - 1) / ln(2) + 1,

whose minimum over the scalar equalizer g_k and MSE weight w_k is attained
at the closed forms g_k = MMSE equalizer, w_k = 1/e_k^MMSE, with minimum
value exactly 1 - R_k in bps/Hz. (The affine bits rescaling of the natural
log form keeps BOTH properties at once: a bare -log2(w) term would shift
the minimiser off 1/e and break exact block descent.) The solvers
alternate these closed-form updates with a precoder / covariance step on
the resulting quadratic surrogate, whose effective quadratic coefficients
therefore carry w_k / ln(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (ChannelRealization, DeploymentSpec, radar_interference,
                    split_steering, steering_vector)


@dataclass(frozen=True)
class WmmseState:
    """Per-user MMSE equalizers g_k and MSE weights w_k (w_k >= 1)."""

    equalizers: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class SurrogateObjective:
    """Value of the regularized WMSE surrogate and its pieces.

    ``value == rho * sum_k mu_k * per_user_wmse_k - probing_term`` always;
    ``probing_term`` is the (possibly shifted) probing reward of the
    deployment.
    """

    value: float
    per_user_wmse: np.ndarray
    probing_term: float


def _mse_terms(channels, precoders, extra_interference=None):
    """Return (h_k^H p_k, T_k) with T_k the total received power plus noise."""
    cross = channels.conj() @ precoders
    direct = np.diag(cross).copy()
    total = np.sum(np.abs(cross) ** 2, axis=1) + 1.0
    if extra_interference is not None:
        total = total + extra_interference
    return direct, total


def _optimal_wg(direct, total):
    signal = np.abs(direct) ** 2
    residual = total - signal
    # with unit noise T_k > |h_k^H p_k|^2 always; guard against roundoff
    assert np.all(residual > 0), "MSE residual must stay positive"
    g = direct.conj() / total
    w = total / residual
    return WmmseState(equalizers=g, weights=w)


def update_wg_separated(precoders, covariance,
                        ch: ChannelRealization) -> WmmseState:
    """Closed-form equalizer/weight update under radar interference."""
    extra = radar_interference(ch.radar_part, covariance)
    direct, total = _mse_terms(ch.comm_part, precoders, extra)
    return _optimal_wg(direct, total)


def update_wg_shared(precoders, ch: ChannelRealization) -> WmmseState:
    direct, total = _mse_terms(ch.full_channels, precoders)
    return _optimal_wg(direct, total)


LN2 = float(np.log(2.0))


def augmented_wmse(channels, precoders, state: WmmseState,
                   extra_interference=None) -> np.ndarray:
    """Per-user xi_k = (w_k e_k - ln w_k - 1)/ln2 + 1 at arbitrary (w, g).

    Jointly minimized by the closed-form updates, with minimum 1 - R_k.
    """
    direct, total = _mse_terms(channels, precoders, extra_interference)
    g, w = state.equalizers, state.weights
    mse = np.abs(g) ** 2 * total - 2.0 * np.real(g * direct) + 1.0
    return (w * mse - np.log(w) - 1.0) / LN2 + 1.0


def surrogate_objective_separated(precoders, covariance, state: WmmseState,
                                  ch: ChannelRealization, rho: float,
                                  weights,
                                  spec: DeploymentSpec) -> SurrogateObjective:
    """Separated-deployment surrogate: rho * sum mu_k xi_k - probing reward.

    The probing reward is a1^H R_x a1 - sum_k p_k^H Z p_k with
    Z = N_tc I - a2 a2^H, i.e. the target power shifted by the constant that
    makes the precoder part convex.
    """
    mu = np.asarray(weights, dtype=float)
    a1, a2 = split_steering(spec)
    extra = radar_interference(ch.radar_part, covariance)
    xi = augmented_wmse(ch.comm_part, precoders, state, extra)
    radar_reward = float(np.real(np.vdot(a1, covariance @ a1)))
    z_cost = (spec.n_comm * float(np.sum(np.abs(precoders) ** 2))
              - float(np.sum(np.abs(a2.conj() @ precoders) ** 2)))
    probing_term = radar_reward - z_cost
    return SurrogateObjective(value=rho * float(mu @ xi) - probing_term,
                              per_user_wmse=xi, probing_term=probing_term)


def surrogate_objective_shared(precoders, state: WmmseState,
                               ch: ChannelRealization, rho: float, weights,
                               spec: DeploymentSpec) -> SurrogateObjective:
    """Shared-deployment surrogate: rho * sum mu_k zeta_k - a^H P P^H a."""
    mu = np.asarray(weights, dtype=float)
    a = steering_vector(spec.target_angle, spec.geometry)
    zeta = augmented_wmse(ch.full_channels, precoders, state)
    probing_term = float(np.sum(np.abs(a.conj() @ precoders) ** 2))
    return SurrogateObjective(value=rho * float(mu @ zeta) - probing_term,
                              per_user_wmse=zeta, probing_term=probing_term)
