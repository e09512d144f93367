"""Pilot-phase receive model and frequency-domain LS channel estimation.

The stacked receive vector over a mirror subcarrier pair obeys
y = (X kron I2) * A * Gamma + w, with A = diag{1,1,1,1,rho,rho,rho,rho} and
w synthesized from white noise through the relay receiver's (mu, nu) pair.
The LS estimate inverts that linear model; its error is a pure noise term,
independent of the realized channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, image_index, sample_channel, self_paired_indices
from .iqmodel import GammaVec, IqCoeffs, NodeIqProfile, composite_pair_channels
from .pilot import PilotMatrix, ScaleB, gram


@dataclass(frozen=True, eq=False)
class ReceiveBlock:
    """Stacked receive pairs [y(n,k), y*(n,k_img)] for n = 1..N_P."""

    y: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.y, dtype=complex).reshape(-1)
        if v.size % 2 != 0:
            raise ValueError("receive block length must be 2*N_P")
        object.__setattr__(self, "y", v)

    @property
    def n_pilot(self) -> int:
        return self.y.size // 2


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """One estimation outcome: the estimate and its squared error."""

    gamma_hat: GammaVec
    squared_error: float
    trials: int = 1

    def __post_init__(self) -> None:
        if self.squared_error < 0.0:
            raise ValueError("squared error cannot be negative")


def _design_matrix(x: PilotMatrix, b: ScaleB) -> np.ndarray:
    """(X kron I2) * A, the 2*N_P x 8 linear map from composites to receives."""
    return np.kron(x.symbols, np.eye(2)) * b.a_diag()


def _estimator_matrix(x: PilotMatrix, b: ScaleB) -> np.ndarray:
    """A^-1 * ((X^H X)^-1 X^H kron I2), the 8 x 2*N_P LS inversion map."""
    g = gram(x).entries
    if np.linalg.cond(g) > 1e12:
        raise np.linalg.LinAlgError("pilot Gram matrix is singular or numerically rank deficient")
    q = np.linalg.solve(g, x.symbols.conj().T)
    return np.kron(q, np.eye(2)) / b.a_diag()[:, None]


def simulate_received(
    x: PilotMatrix,
    gamma: GammaVec,
    b: ScaleB,
    rx_relay: IqCoeffs,
    sigma_v2: float,
    rng: np.random.Generator,
) -> ReceiveBlock:
    """One noisy pilot-phase observation of the composite channel vector.

    The noise is built from per-symbol white samples v(n,k), v(n,k_img)
    mixed by the receive chain: w = [mu*v_k + nu*conj(v_img),
    conj(mu)*conj(v_img) + conj(nu)*v_k]. Assumes a distinct-pair
    subcarrier (k != k_img).
    """
    if sigma_v2 <= 0.0:
        raise ValueError(f"sigma_v2 must be positive, got {sigma_v2}")
    n_p = x.n_pilot
    signal = _design_matrix(x, b) @ gamma.entries
    noise_scale = np.sqrt(sigma_v2 / 2.0)
    v_k = noise_scale * (rng.standard_normal(n_p) + 1j * rng.standard_normal(n_p))
    v_khat = noise_scale * (rng.standard_normal(n_p) + 1j * rng.standard_normal(n_p))
    mu, nu = rx_relay.mu, rx_relay.nu
    w = np.empty(2 * n_p, dtype=complex)
    w[0::2] = mu * v_k + nu * np.conj(v_khat)
    w[1::2] = np.conj(mu) * np.conj(v_khat) + np.conj(nu) * v_k
    return ReceiveBlock(y=signal + w)


def ls_estimate(x: PilotMatrix, y: ReceiveBlock, b: ScaleB) -> GammaVec:
    """LS inversion of the stacked receive model."""
    if y.n_pilot != x.n_pilot:
        raise ValueError(
            f"receive block has {y.n_pilot} symbol pairs but pilot matrix has {x.n_pilot}"
        )
    return GammaVec(_estimator_matrix(x, b) @ y.y)


def estimate_once(
    x: PilotMatrix,
    gamma: GammaVec,
    b: ScaleB,
    rx_relay: IqCoeffs,
    sigma_v2: float,
    rng: np.random.Generator,
) -> EstimateReport:
    """Simulate one receive block and estimate; report the squared error."""
    y = simulate_received(x, gamma, b, rx_relay, sigma_v2, rng)
    gamma_hat = ls_estimate(x, y, b)
    err = float(np.sum(np.abs(gamma.entries - gamma_hat.entries) ** 2))
    return EstimateReport(gamma_hat=gamma_hat, squared_error=err)


def per_trial_squared_errors(
    x: PilotMatrix,
    b: ScaleB,
    profile: NodeIqProfile,
    sigma_v2: float,
    trials: int,
    seed: int,
    channel_cfg: ChannelConfig | None = None,
    subcarrier: int = 2,
    channel_seed: int | None = None,
) -> np.ndarray:
    """Squared estimation errors of independent Monte Carlo trials.

    Trial t draws its channel stream from (channel_seed or seed, t, 0) and
    its noise stream from (seed, t, 1), so results are reproducible for any
    execution order and the noise can be pinned while channels vary.
    """
    if trials < 1:
        raise ValueError(f"need trials >= 1, got {trials}")
    cfg = channel_cfg if channel_cfg is not None else ChannelConfig()
    n = cfg.n_subcarriers
    if subcarrier in self_paired_indices(n):
        raise ValueError(f"subcarrier {subcarrier} is its own image; pick a distinct pair")
    khat = image_index(subcarrier, n)
    ch_seed = seed if channel_seed is None else channel_seed

    est_mat = _estimator_matrix(x, b)
    design = _design_matrix(x, b)
    n_p = x.n_pilot
    noise_scale_base = np.sqrt(sigma_v2 / 2.0)
    mu, nu = profile.rx_relay.mu, profile.rx_relay.nu

    errors = np.empty(trials)
    for t in range(trials):
        rng_ch = np.random.default_rng([ch_seed, t, 0])
        h_sr = sample_channel(cfg, rng_ch)
        h_rr = sample_channel(cfg, rng_ch)
        gamma = composite_pair_channels(
            h_sr.at(subcarrier), h_sr.at(khat), h_rr.at(subcarrier), h_rr.at(khat), profile
        )
        rng_noise = np.random.default_rng([seed, t, 1])
        v_k = noise_scale_base * (
            rng_noise.standard_normal(n_p) + 1j * rng_noise.standard_normal(n_p)
        )
        v_khat = noise_scale_base * (
            rng_noise.standard_normal(n_p) + 1j * rng_noise.standard_normal(n_p)
        )
        w = np.empty(2 * n_p, dtype=complex)
        w[0::2] = mu * v_k + nu * np.conj(v_khat)
        w[1::2] = np.conj(mu) * np.conj(v_khat) + np.conj(nu) * v_k
        y = design @ gamma.entries + w
        gamma_hat = est_mat @ y
        errors[t] = np.sum(np.abs(gamma.entries - gamma_hat) ** 2)
    return errors


def empirical_sum_mse(
    x: PilotMatrix,
    b: ScaleB,
    profile: NodeIqProfile,
    sigma_v2: float,
    trials: int,
    seed: int,
    channel_cfg: ChannelConfig | None = None,
    subcarrier: int = 2,
    channel_seed: int | None = None,
) -> float:
    """Monte Carlo Sum-MSE: mean squared estimation error over fresh channel
    and noise draws, accumulated in trial order."""
    errors = per_trial_squared_errors(
        x,
        b,
        profile,
        sigma_v2,
        trials,
        seed,
        channel_cfg=channel_cfg,
        subcarrier=subcarrier,
        channel_seed=channel_seed,
    )
    total = 0.0
    for e in errors:
        total += float(e)
    return total / trials
