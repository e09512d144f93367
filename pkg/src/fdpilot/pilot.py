"""Pilot matrix constructions and the analytic Sum-MSE of a pilot Gram.

A pilot matrix is N_P x 4: two columns carry the source pilots (direct and
image positions), two carry the relay pilots. The Sum-MSE of the LS
estimator depends on the pilot only through its Gram X^H X; the minimizing
Gram under the per-node power traces is diag(N_P*P_S, N_P*P_S, N_P*P_R,
N_P*P_R), which every construction below attains exactly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .iqmodel import NoiseCov

DEFAULT_OPTIMALITY_TOL = 1e-9


@dataclass(frozen=True)
class ScaleB:
    """Self-interference scale rho, as the diagonal weight diag{1,1,rho,rho}."""

    rho: float

    def __post_init__(self) -> None:
        if not (self.rho > 0.0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be positive and finite, got {self.rho}")

    def b_matrix(self) -> np.ndarray:
        return np.diag([1.0, 1.0, self.rho, self.rho])

    def a_diag(self) -> np.ndarray:
        """Diagonal of the 8x8 weight acting on the stacked composite vector."""
        return np.repeat([1.0, 1.0, self.rho, self.rho], 2)


@dataclass(frozen=True, eq=False)
class PilotMatrix:
    """N_P x 4 pilot symbols with the per-node power budget they were built for."""

    symbols: np.ndarray
    p_source: float
    p_relay: float
    n_pilot: int

    def __post_init__(self) -> None:
        s = np.asarray(self.symbols, dtype=complex)
        if s.ndim != 2 or s.shape[1] != 4:
            raise ValueError(f"pilot matrix must be N_P x 4, got {s.shape}")
        if self.n_pilot != s.shape[0]:
            raise ValueError(f"n_pilot={self.n_pilot} does not match {s.shape[0]} rows")
        if self.n_pilot < 4:
            raise ValueError(f"need n_pilot >= 4, got {self.n_pilot}")
        if not (self.p_source > 0.0 and self.p_relay > 0.0):
            raise ValueError("pilot powers must be positive")
        norms = np.sum(np.abs(s) ** 2, axis=0)
        budget_s = 2.0 * self.n_pilot * self.p_source
        budget_r = 2.0 * self.n_pilot * self.p_relay
        if norms[0] + norms[1] > budget_s * (1.0 + 1e-9):
            raise ValueError("source pilot columns exceed the power budget")
        if norms[2] + norms[3] > budget_r * (1.0 + 1e-9):
            raise ValueError("relay pilot columns exceed the power budget")
        object.__setattr__(self, "symbols", s)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """4x4 Hermitian Gram X^H X of a pilot matrix."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=complex)
        if e.shape != (4, 4):
            raise ValueError(f"Gram matrix must be 4x4, got {e.shape}")
        scale = max(1.0, float(np.abs(e).max()))
        if not np.allclose(e, e.conj().T, rtol=0.0, atol=1e-10 * scale):
            raise ValueError("Gram matrix must be Hermitian")
        object.__setattr__(self, "entries", e)


def optimal_gram(n_pilot: int, p_source: float, p_relay: float) -> GramMatrix:
    """The Sum-MSE-minimizing Gram diag(N_P*P_S, N_P*P_S, N_P*P_R, N_P*P_R)."""
    d = np.array([n_pilot * p_source] * 2 + [n_pilot * p_relay] * 2, dtype=float)
    return GramMatrix(np.diag(d).astype(complex))


def _column_scales(n_pilot: int, p_source: float, p_relay: float) -> np.ndarray:
    return np.sqrt(np.array([p_source, p_source, p_relay, p_relay]) * n_pilot)


def build_pilot_dft(
    n_pilot: int,
    p_source: float,
    p_relay: float,
    columns: Sequence[int] | None = None,
) -> PilotMatrix:
    """Pilot from four distinct columns of the N_P-point normalized DFT matrix.

    Column m holds entries W**(m*n)/sqrt(N_P) with W = exp(-2j*pi/N_P); the
    four selected columns are scaled to squared norms N_P*P_S, N_P*P_S,
    N_P*P_R, N_P*P_R. Defaults to columns (1, N_P-1, 2, N_P-2) when N_P >= 5
    (conjugate column pairs) and (0, 1, 2, 3) at N_P = 4.
    """
    if n_pilot < 4:
        raise ValueError(f"need n_pilot >= 4, got {n_pilot}")
    if columns is None:
        columns = (1, n_pilot - 1, 2, n_pilot - 2) if n_pilot >= 5 else (0, 1, 2, 3)
    cols = tuple(int(c) for c in columns)
    if len(cols) != 4 or len(set(cols)) != 4:
        raise ValueError(f"need 4 distinct column indices, got {columns}")
    if any(not 0 <= c < n_pilot for c in cols):
        raise ValueError(f"column indices must lie in 0..{n_pilot - 1}, got {columns}")
    rows = np.arange(n_pilot)
    w = np.exp(-2j * np.pi / n_pilot)
    dft_cols = np.stack([w ** (rows * c) for c in cols], axis=1) / np.sqrt(n_pilot)
    symbols = dft_cols * _column_scales(n_pilot, p_source, p_relay)
    return PilotMatrix(symbols=symbols, p_source=p_source, p_relay=p_relay, n_pilot=n_pilot)


def build_pilot_hadamard4(p_source: float, p_relay: float) -> PilotMatrix:
    """4x4 pilot: order-4 Hadamard matrix with even rows multiplied by j.

    The j on even rows makes column 2 the conjugate of column 1 and column 4
    the conjugate of column 3, so the matrix also serves the self-paired
    subcarriers; columns are scaled by sqrt(P_S), sqrt(P_S), sqrt(P_R),
    sqrt(P_R).
    """
    if not (p_source > 0.0 and p_relay > 0.0):
        raise ValueError("pilot powers must be positive")
    h4 = np.array(
        [
            [1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1],
        ],
        dtype=complex,
    )
    h4[1::2, :] *= 1j
    symbols = h4 * np.sqrt([p_source, p_source, p_relay, p_relay])
    return PilotMatrix(symbols=symbols, p_source=p_source, p_relay=p_relay, n_pilot=4)


def build_pilot_conjugate_pair(n_pilot: int, p_source: float, p_relay: float) -> PilotMatrix:
    """DFT pilot whose columns come in conjugate pairs (2=conj(1), 4=conj(3)).

    Requires n_pilot >= 5: the 4-point DFT matrix has no two disjoint
    conjugate column pairs besides its self-conjugate columns.
    """
    if n_pilot < 5:
        raise ValueError(f"conjugate-pair construction needs n_pilot >= 5, got {n_pilot}")
    return build_pilot_dft(
        n_pilot, p_source, p_relay, columns=(1, n_pilot - 1, 2, n_pilot - 2)
    )


def gram(x: PilotMatrix) -> GramMatrix:
    """X^H X of the pilot symbols."""
    s = x.symbols
    return GramMatrix(s.conj().T @ s)


def analytic_sum_mse(y: GramMatrix, b: ScaleB, cw: NoiseCov) -> float:
    """Sum-MSE of the LS estimate for pilot Gram y: tr{B^-2 Y^-1} * tr{C_w}."""
    e = y.entries
    if np.linalg.cond(e) > 1e12:
        raise np.linalg.LinAlgError("pilot Gram matrix is singular or numerically rank deficient")
    y_inv = np.linalg.inv(e)
    b2_inv = np.array([1.0, 1.0, b.rho**-2, b.rho**-2])
    return float(np.real(np.sum(b2_inv * np.diag(y_inv))) * cw.trace)


def is_optimal_pilot(x: PilotMatrix, tol: float = DEFAULT_OPTIMALITY_TOL) -> bool:
    """Whether X^H X equals the diagonal power-loaded Gram within tol.

    Max-entry deviation is compared against tol * N_P * max(P_S, P_R).
    """
    target = optimal_gram(x.n_pilot, x.p_source, x.p_relay).entries
    dev = np.abs(gram(x).entries - target).max()
    return bool(dev <= tol * x.n_pilot * max(x.p_source, x.p_relay))


def pilot_to_csv(x: PilotMatrix) -> str:
    """CSV text: one row per OFDM symbol, re/im of the four pilot entries."""
    buf = io.StringIO()
    buf.write("x1_re,x1_im,x2_re,x2_im,x3_re,x3_im,x4_re,x4_im\n")
    for row in x.symbols:
        parts = []
        for v in row:
            parts.append(f"{v.real:.16e}")
            parts.append(f"{v.imag:.16e}")
        buf.write(",".join(parts) + "\n")
    return buf.getvalue()
