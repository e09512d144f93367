"""Power allocation between source and relay pilots, the received-SNR map,
and the closed-form Sum-MSE expressions in rho and SNR.

With the optimal pilot Gram in place, the Sum-MSE of a subcarrier pair is
(2/N_P)*(1/P_S + 1/(rho^2*P_R))*tr(C_w). Minimizing it under a total power
budget P gives the proportional split P_S = rho*P/(1+rho),
P_R = P/(1+rho); the equal split P_S = P_R = P/2 is the baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .iqmodel import NodeIqProfile, NoiseCov

POLICIES = ("opa", "epa")


@dataclass(frozen=True)
class PowerSplit:
    """Per-node pilot powers drawn from a total budget."""

    p_source: float
    p_relay: float
    p_total: float

    def __post_init__(self) -> None:
        if not (self.p_source > 0.0 and self.p_relay > 0.0):
            raise ValueError("powers must be positive")
        if self.p_source + self.p_relay > self.p_total * (1.0 + 1e-12):
            raise ValueError(
                f"split {self.p_source} + {self.p_relay} exceeds the budget {self.p_total}"
            )


@dataclass(frozen=True)
class SnrPoint:
    """Receive SNR in linear units with its dB image."""

    gamma_linear: float
    gamma_db: float

    def __post_init__(self) -> None:
        if not (self.gamma_linear > 0.0 and math.isfinite(self.gamma_linear)):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma_linear}")
        if abs(self.gamma_db - 10.0 * math.log10(self.gamma_linear)) > 1e-9:
            raise ValueError("gamma_db does not match gamma_linear")

    @classmethod
    def from_linear(cls, gamma: float) -> "SnrPoint":
        return cls(gamma_linear=gamma, gamma_db=10.0 * math.log10(gamma))

    @classmethod
    def from_db(cls, gamma_db: float) -> "SnrPoint":
        return cls(gamma_linear=10.0 ** (gamma_db / 10.0), gamma_db=gamma_db)


def opa(p_total: float, rho: float) -> PowerSplit:
    """Sum-MSE-minimizing split of the total budget: P_S/P_R = rho."""
    if p_total <= 0.0 or rho <= 0.0:
        raise ValueError("p_total and rho must be positive")
    return PowerSplit(
        p_source=rho * p_total / (1.0 + rho),
        p_relay=p_total / (1.0 + rho),
        p_total=p_total,
    )


def epa(p_total: float) -> PowerSplit:
    """Equal split of the total budget."""
    if p_total <= 0.0:
        raise ValueError("p_total must be positive")
    return PowerSplit(p_source=p_total / 2.0, p_relay=p_total / 2.0, p_total=p_total)


def sum_mse_given_powers(
    split: PowerSplit, rho: float, n_pilot: int, cw: NoiseCov
) -> float:
    """Sum-MSE at the optimal pilot Gram for an arbitrary power split."""
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    if n_pilot < 4:
        raise ValueError(f"need n_pilot >= 4, got {n_pilot}")
    return (2.0 / n_pilot) * (1.0 / split.p_source + 1.0 / (rho**2 * split.p_relay)) * cw.trace


def received_snr(
    split: PowerSplit, rho: float, profile: NodeIqProfile, sigma_v2: float
) -> SnrPoint:
    """Receive SNR at the relay: IQ-weighted pilot power over noise power."""
    if rho <= 0.0 or sigma_v2 <= 0.0:
        raise ValueError("rho and sigma_v2 must be positive")
    num = (
        profile.tx_source.gain * split.p_source
        + rho**2 * profile.tx_relay.gain * split.p_relay
    )
    return SnrPoint.from_linear(num / sigma_v2)


def power_for_snr(
    gamma_target: SnrPoint,
    rho: float,
    profile: NodeIqProfile,
    sigma_v2: float,
    policy: str,
) -> PowerSplit:
    """Invert the SNR map: the unique split of the given policy whose
    received SNR equals gamma_target."""
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")
    if rho <= 0.0 or sigma_v2 <= 0.0:
        raise ValueError("rho and sigma_v2 must be positive")
    a = profile.tx_source.gain
    b = profile.tx_relay.gain
    target = gamma_target.gamma_linear * sigma_v2
    if policy == "opa":
        # gamma*sigma^2 = P * rho * (a + rho*b) / (1 + rho)
        p_total = target * (1.0 + rho) / (rho * (a + rho * b))
        return opa(p_total, rho)
    # gamma*sigma^2 = P * (a + rho^2*b) / 2
    p_total = 2.0 * target / (a + rho**2 * b)
    return epa(p_total)


def sum_mse_opa(rho: float, gamma: SnrPoint, profile: NodeIqProfile, n_pilot: int) -> float:
    """Minimum Sum-MSE at receive SNR gamma under the proportional split."""
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    a = profile.tx_source.gain
    b = profile.tx_relay.gain
    c = profile.rx_relay.gain
    return (4.0 * c / (gamma.gamma_linear * n_pilot)) * ((1.0 + 1.0 / rho) * a + (1.0 + rho) * b)


def sum_mse_epa(rho: float, gamma: SnrPoint, profile: NodeIqProfile, n_pilot: int) -> float:
    """Sum-MSE at receive SNR gamma under the equal split."""
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    a = profile.tx_source.gain
    b = profile.tx_relay.gain
    c = profile.rx_relay.gain
    return (4.0 * c / (gamma.gamma_linear * n_pilot)) * (
        (1.0 + 1.0 / rho**2) * a + (1.0 + rho**2) * b
    )


def rho_opt(profile: NodeIqProfile) -> float:
    """The rho minimizing the proportional-split Sum-MSE at fixed SNR."""
    return math.sqrt(profile.tx_source.gain / profile.tx_relay.gain)


def sum_mse_global_min(gamma: SnrPoint, profile: NodeIqProfile, n_pilot: int) -> float:
    """The proportional-split Sum-MSE evaluated at its minimizing rho."""
    a = profile.tx_source.gain
    b = profile.tx_relay.gain
    c = profile.rx_relay.gain
    return (4.0 * c / (gamma.gamma_linear * n_pilot)) * (math.sqrt(a) + math.sqrt(b)) ** 2
