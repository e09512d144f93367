"""Quasi-static Rayleigh frequency-domain channels and mirror-subcarrier
indexing for an N-subcarrier OFDM grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PDP_KINDS = ("uniform", "exponential")


@dataclass(frozen=True)
class ChannelConfig:
    """Tapped-delay-line channel description.

    The power-delay profile spreads avg_gain over n_taps taps, so every
    subcarrier has mean power avg_gain regardless of the profile shape.
    """

    n_subcarriers: int = 512
    cp_len: int = 32
    n_taps: int = 32
    pdp: str = "uniform"
    decay: float = 1.0
    avg_gain: float = 1.0

    def __post_init__(self) -> None:
        if self.n_subcarriers < 4 or self.n_subcarriers % 2 != 0:
            raise ValueError(f"n_subcarriers must be even and >= 4, got {self.n_subcarriers}")
        if not 1 <= self.n_taps <= self.cp_len:
            raise ValueError(f"need 1 <= n_taps <= cp_len, got n_taps={self.n_taps}, cp_len={self.cp_len}")
        if self.pdp not in PDP_KINDS:
            raise ValueError(f"pdp must be one of {PDP_KINDS}, got {self.pdp!r}")
        if self.avg_gain <= 0.0:
            raise ValueError(f"avg_gain must be positive, got {self.avg_gain}")
        if self.pdp == "exponential" and self.decay <= 0.0:
            raise ValueError(f"exponential pdp needs decay > 0, got {self.decay}")

    def tap_powers(self) -> np.ndarray:
        """Per-tap variances, normalized to sum to avg_gain."""
        if self.pdp == "uniform":
            weights = np.ones(self.n_taps)
        else:
            weights = np.exp(-self.decay * np.arange(self.n_taps))
        return self.avg_gain * weights / weights.sum()


@dataclass(frozen=True, eq=False)
class FreqChannel:
    """Frequency response over the full subcarrier grid (0-based storage)."""

    response: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.response, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(r)):
            raise ValueError("channel response must be finite")
        object.__setattr__(self, "response", r)

    def at(self, k: int) -> complex:
        """Value at 1-based subcarrier index k."""
        n = self.response.shape[0]
        if not 1 <= k <= n:
            raise ValueError(f"subcarrier index must lie in 1..{n}, got {k}")
        return complex(self.response[k - 1])


def sample_channel(cfg: ChannelConfig, rng: np.random.Generator) -> FreqChannel:
    """Draw one quasi-static Rayleigh realization.

    Taps are i.i.d. circular complex Gaussian with the configured per-tap
    variances; the frequency response is their length-N DFT, so
    E{|H(k)|^2} = avg_gain on every subcarrier.
    """
    powers = cfg.tap_powers()
    scale = np.sqrt(powers / 2.0)
    taps = scale * (rng.standard_normal(cfg.n_taps) + 1j * rng.standard_normal(cfg.n_taps))
    return FreqChannel(response=np.fft.fft(taps, n=cfg.n_subcarriers))


def image_index(k: int, n: int) -> int:
    """1-based index of the mirror subcarrier, <N - k + 2> mod N in 1..N."""
    if not 1 <= k <= n:
        raise ValueError(f"subcarrier index must lie in 1..{n}, got {k}")
    khat = (n - k + 2) % n
    return khat if khat != 0 else n


def self_paired_indices(n: int) -> tuple[int, int]:
    """The two subcarriers that are their own image on an even grid."""
    return 1, n // 2 + 1
