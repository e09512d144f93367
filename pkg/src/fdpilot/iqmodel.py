"""IQ-imbalance model: (mu, nu) mixing coefficients, composite channel
coefficients of a mirror-subcarrier pair, and the receive-noise covariance.

An imbalanced chain maps a baseband signal s to mu*s + nu*conj(s_image).
Everything downstream (composite channels, noise statistics) is expressed
through the per-chain pairs (mu, nu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CONVERSION_MODES = ("deviation", "ratio")


@dataclass(frozen=True)
class IqParams:
    """Amplitude/phase imbalance of one transmitter or receiver chain.

    alpha_db is mapped to the linear amplitude coefficient according to
    conversion_mode:
      * "deviation": alpha = 10**(alpha_db/20) - 1, so 0 dB is a perfectly
        balanced chain (the default).
      * "ratio": alpha = 10**(alpha_db/20), kept for sensitivity studies.
    """

    alpha_db: float
    theta_deg: float
    conversion_mode: str = "deviation"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha_db) and math.isfinite(self.theta_deg)):
            raise ValueError("IqParams fields must be finite")
        if not -180.0 < self.theta_deg < 180.0:
            raise ValueError(f"theta_deg must lie in (-180, 180), got {self.theta_deg}")
        if self.conversion_mode not in CONVERSION_MODES:
            raise ValueError(
                f"conversion_mode must be one of {CONVERSION_MODES}, got {self.conversion_mode!r}"
            )

    @property
    def alpha_linear(self) -> float:
        scale = 10.0 ** (self.alpha_db / 20.0)
        return scale - 1.0 if self.conversion_mode == "deviation" else scale


@dataclass(frozen=True)
class IqCoeffs:
    """Direct/image mixing pair of one chain."""

    mu: complex
    nu: complex

    def __post_init__(self) -> None:
        if not (np.isfinite(self.mu) and np.isfinite(self.nu)):
            raise ValueError("IqCoeffs must be finite")
        if abs(self.mu) ** 2 + abs(self.nu) ** 2 <= 0.0:
            raise ValueError("IqCoeffs must not both be zero")

    @property
    def gain(self) -> float:
        """|mu|^2 + |nu|^2, the total power gain of the chain."""
        return abs(self.mu) ** 2 + abs(self.nu) ** 2

    @classmethod
    def ideal(cls) -> "IqCoeffs":
        return cls(mu=1.0 + 0.0j, nu=0.0 + 0.0j)


@dataclass(frozen=True)
class NodeIqProfile:
    """The three imbalanced chains of a source/relay pair.

    tx_source and tx_relay are the two transmitters seen by the relay
    receiver; rx_relay is the relay's own receive chain.
    """

    tx_source: IqCoeffs
    tx_relay: IqCoeffs
    rx_relay: IqCoeffs


@dataclass(frozen=True, eq=False)
class NoiseCov:
    """2x2 covariance of one stacked receive-noise pair [w(k), w*(k_image)]."""

    entries: np.ndarray
    sigma_v2: float

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (2, 2):
            raise ValueError(f"noise covariance must be 2x2, got {e.shape}")
        if not np.allclose(e, e.conj().T, rtol=0.0, atol=1e-12 * max(1.0, abs(e).max())):
            raise ValueError("noise covariance must be Hermitian")
        object.__setattr__(self, "entries", e)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True, eq=False)
class GammaVec:
    """The 8 composite channel coefficients of one subcarrier pair, ordered
    [A_sr(k), B_sr(k_img)*, B_sr(k), A_sr(k_img)*,
     A_rr(k), B_rr(k_img)*, B_rr(k), A_rr(k_img)*].
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=complex).reshape(-1)
        if e.shape != (8,):
            raise ValueError(f"composite channel vector must have 8 entries, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("composite channel vector must be finite")
        object.__setattr__(self, "entries", e)


def iq_coefficients(params: IqParams) -> IqCoeffs:
    """Map (alpha_db, theta_deg) to the chain's (mu, nu) mixing pair.

    mu = cos(theta/2) + j*alpha*sin(theta/2)
    nu = alpha*cos(theta/2) - j*sin(theta/2)
    with alpha the linear amplitude coefficient of params.
    """
    alpha = params.alpha_linear
    half = math.radians(params.theta_deg) / 2.0
    c, s = math.cos(half), math.sin(half)
    return IqCoeffs(mu=complex(c, alpha * s), nu=complex(alpha * c, -s))


def make_profile(
    tx_source: IqParams, tx_relay: IqParams, rx_relay: IqParams
) -> NodeIqProfile:
    """Build the three-chain profile from per-chain imbalance parameters."""
    return NodeIqProfile(
        tx_source=iq_coefficients(tx_source),
        tx_relay=iq_coefficients(tx_relay),
        rx_relay=iq_coefficients(rx_relay),
    )


def composite_pair_channels(
    h_sr_k: complex,
    h_sr_khat: complex,
    h_rr_k: complex,
    h_rr_khat: complex,
    profile: NodeIqProfile,
) -> GammaVec:
    """Mix the physical channel values at (k, k_image) with the IQ chains.

    For a transmitter with pair (mu_t, nu_t) behind the relay receiver
    (mu_r, nu_r), the direct and image composites at subcarrier k are
      A(k) = mu_r*mu_t*H(k) + nu_r*conj(nu_t)*conj(H(k_img))
      B(k) = mu_r*nu_t*H(k) + nu_r*conj(mu_t)*conj(H(k_img))
    and the returned vector stacks [A(k), B(k_img)*, B(k), A(k_img)*] for
    the source channel followed by the same four for the self-interference
    channel.
    """
    for v in (h_sr_k, h_sr_khat, h_rr_k, h_rr_khat):
        if not np.isfinite(v):
            raise ValueError("channel values must be finite")
    mu_r, nu_r = profile.rx_relay.mu, profile.rx_relay.nu

    def direct_image(mu_t: complex, nu_t: complex, h_k: complex, h_khat: complex):
        a_k = mu_r * mu_t * h_k + nu_r * np.conj(nu_t) * np.conj(h_khat)
        b_k = mu_r * nu_t * h_k + nu_r * np.conj(mu_t) * np.conj(h_khat)
        a_khat = mu_r * mu_t * h_khat + nu_r * np.conj(nu_t) * np.conj(h_k)
        b_khat = mu_r * nu_t * h_khat + nu_r * np.conj(mu_t) * np.conj(h_k)
        return a_k, b_k, a_khat, b_khat

    sa_k, sb_k, sa_khat, sb_khat = direct_image(
        profile.tx_source.mu, profile.tx_source.nu, h_sr_k, h_sr_khat
    )
    ra_k, rb_k, ra_khat, rb_khat = direct_image(
        profile.tx_relay.mu, profile.tx_relay.nu, h_rr_k, h_rr_khat
    )
    return GammaVec(
        np.array(
            [
                sa_k,
                np.conj(sb_khat),
                sb_k,
                np.conj(sa_khat),
                ra_k,
                np.conj(rb_khat),
                rb_k,
                np.conj(ra_khat),
            ],
            dtype=complex,
        )
    )


def noise_cov(rx_relay: IqCoeffs, sigma_v2: float) -> NoiseCov:
    """Covariance of the IQ-mixed noise pair [w(k), w*(k_image)].

    Diagonal entries sigma_v2*(|mu|^2+|nu|^2), off-diagonal 2*sigma_v2*mu*nu
    and its conjugate; always Hermitian positive semidefinite.
    """
    if not (sigma_v2 > 0.0 and math.isfinite(sigma_v2)):
        raise ValueError(f"sigma_v2 must be positive and finite, got {sigma_v2}")
    mu, nu = rx_relay.mu, rx_relay.nu
    diag = sigma_v2 * (abs(mu) ** 2 + abs(nu) ** 2)
    off = 2.0 * sigma_v2 * mu * nu
    entries = np.array([[diag, off], [np.conj(off), diag]], dtype=complex)
    return NoiseCov(entries=entries, sigma_v2=float(sigma_v2))
