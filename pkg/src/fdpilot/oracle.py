"""Independent numerical verifiers for the closed-form results.

Each oracle re-derives an optimum without using the closed form it checks:
the pilot Gram by projected descent on a full-rank factor, the power split
by grid search, the best rho by grid search plus golden-section refinement,
and the stationarity conditions by direct residual evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import PowerSplit, SnrPoint, sum_mse_given_powers, sum_mse_opa
from .iqmodel import NodeIqProfile, NoiseCov
from .pilot import GramMatrix, ScaleB

_ES_PROJ = np.diag([1.0, 1.0, 0.0, 0.0])
_ER_PROJ = np.diag([0.0, 0.0, 1.0, 1.0])


@dataclass(frozen=True)
class KktReport:
    """Residuals of the first-order optimality system for a pilot Gram."""

    stationarity_residual: float
    slackness_s: float
    slackness_r: float
    lambda_dual: float
    gamma_dual: float


@dataclass(frozen=True, eq=False)
class PilotOptimumResult:
    """Outcome of the numerical pilot-Gram minimization."""

    gram: GramMatrix
    objective: float
    converged: bool


def kkt_residual(
    y: GramMatrix, b: ScaleB, p_source: float, p_relay: float, n_pilot: int
) -> KktReport:
    """Evaluate the stationarity and complementary-slackness residuals at y.

    Uses the dual values lambda = 1/(N_P*P_S)^2 and gamma = 1/(rho*N_P*P_R)^2
    implied by active power constraints; the stationarity residual is the
    max-entry norm of -Y^-1 B^-2 Y^-1 + lambda*E_S E_S^H + gamma*E_R E_R^H.
    """
    e = y.entries
    if np.linalg.cond(e) > 1e12:
        raise np.linalg.LinAlgError("Gram matrix is singular or numerically rank deficient")
    lam = 1.0 / (n_pilot * p_source) ** 2
    gam = 1.0 / (b.rho * n_pilot * p_relay) ** 2
    y_inv = np.linalg.inv(e)
    b2_inv = np.diag([1.0, 1.0, b.rho**-2, b.rho**-2])
    stationarity = -y_inv @ b2_inv @ y_inv + lam * _ES_PROJ + gam * _ER_PROJ
    trace_s = float(np.trace(_ES_PROJ @ e).real)
    trace_r = float(np.trace(_ER_PROJ @ e).real)
    return KktReport(
        stationarity_residual=float(np.abs(stationarity).max()),
        slackness_s=abs(trace_s - 2.0 * n_pilot * p_source),
        slackness_r=abs(trace_r - 2.0 * n_pilot * p_relay),
        lambda_dual=lam,
        gamma_dual=gam,
    )


def _rescale_to_active(factor: np.ndarray, p_source: float, p_relay: float, n_pilot: int) -> np.ndarray:
    """Scale the source and relay blocks so both power traces are active."""
    y = factor @ factor.conj().T
    trace_s = float(np.real(y[0, 0] + y[1, 1]))
    trace_r = float(np.real(y[2, 2] + y[3, 3]))
    scale = np.ones(4)
    scale[:2] = math.sqrt(2.0 * n_pilot * p_source / trace_s)
    scale[2:] = math.sqrt(2.0 * n_pilot * p_relay / trace_r)
    return scale[:, None] * factor


def numeric_pilot_optimum(
    p_source: float,
    p_relay: float,
    rho: float,
    n_pilot: int,
    iters: int = 3000,
    seed: int = 0,
) -> PilotOptimumResult:
    """Minimize tr{B^-2 Y^-1} over feasible Hermitian-PD Grams numerically.

    Y is parameterized as L L^H with L a full-rank 4x4 factor (positive
    definiteness is implicit); each accepted step rescales the two power
    blocks back to activity. Gradient steps use backtracking so the
    objective decreases monotonically.
    """
    if min(p_source, p_relay, rho) <= 0.0 or n_pilot < 4:
        raise ValueError("powers and rho must be positive, n_pilot >= 4")
    rng = np.random.default_rng(seed)
    b2_inv = np.diag([1.0, 1.0, rho**-2, rho**-2])

    def objective(factor: np.ndarray) -> float:
        y = factor @ factor.conj().T
        return float(np.real(np.trace(b2_inv @ np.linalg.inv(y))))

    factor = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    factor = _rescale_to_active(factor, p_source, p_relay, n_pilot)
    obj = objective(factor)
    step = 1.0
    rel_improvement = math.inf
    for _ in range(iters):
        y = factor @ factor.conj().T
        y_inv = np.linalg.inv(y)
        grad = -(y_inv @ b2_inv @ y_inv) @ factor
        accepted = False
        for _ in range(40):
            candidate = _rescale_to_active(
                factor - step * grad, p_source, p_relay, n_pilot
            )
            cand_obj = objective(candidate)
            if cand_obj < obj:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            rel_improvement = 0.0
            break
        rel_improvement = (obj - cand_obj) / obj
        factor, obj = candidate, cand_obj
        step *= 1.5
        if rel_improvement < 1e-14:
            break
    y_final = factor @ factor.conj().T
    y_final = 0.5 * (y_final + y_final.conj().T)
    return PilotOptimumResult(
        gram=GramMatrix(y_final), objective=obj, converged=rel_improvement <= 1e-8
    )


def numeric_power_optimum(
    p_total: float, rho: float, n_pilot: int, cw: NoiseCov, grid_points: int = 1001
) -> float:
    """Grid-search the source power minimizing the closed-budget Sum-MSE.

    Searches the interior of (0, p_total) on a uniform grid and returns the
    minimizing P_S; resolution is p_total / (grid_points + 1).
    """
    if grid_points < 100:
        raise ValueError(f"need grid_points >= 100, got {grid_points}")
    p_s_grid = np.linspace(0.0, p_total, grid_points + 2)[1:-1]
    values = [
        sum_mse_given_powers(
            PowerSplit(p_source=p_s, p_relay=p_total - p_s, p_total=p_total),
            rho,
            n_pilot,
            cw,
        )
        for p_s in p_s_grid
    ]
    return float(p_s_grid[int(np.argmin(values))])


def _golden_section(f, lo: float, hi: float, tol: float = 1e-8) -> float:
    """Minimize a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def numeric_rho_optimum(
    gamma: SnrPoint,
    profile: NodeIqProfile,
    n_pilot: int,
    rho_grid: np.ndarray | None = None,
) -> float:
    """Locate the Sum-MSE-minimizing rho by log-grid search plus
    golden-section refinement between the bracketing grid neighbours."""
    if rho_grid is None:
        rho_grid = np.logspace(math.log10(1.0 / 64.0), math.log10(64.0), 97)
    rho_grid = np.asarray(rho_grid, dtype=float)
    if rho_grid[0] > 1.0 / 64.0 * (1.0 + 1e-9) or rho_grid[-1] < 64.0 * (1.0 - 1e-9):
        raise ValueError("rho grid must span at least [1/64, 64]")

    def f_log(log_rho: float) -> float:
        return sum_mse_opa(10.0**log_rho, gamma, profile, n_pilot)

    values = [sum_mse_opa(r, gamma, profile, n_pilot) for r in rho_grid]
    i = int(np.argmin(values))
    lo = math.log10(rho_grid[max(i - 1, 0)])
    hi = math.log10(rho_grid[min(i + 1, rho_grid.size - 1)])
    return 10.0 ** _golden_section(f_log, lo, hi, tol=1e-10)


def principal_sqrt_hpd(s: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """The unique Hermitian positive definite P with P @ P = s.

    Computed by eigendecomposition; inputs that are not Hermitian or whose
    smallest eigenvalue is <= tol (relative to the largest) are rejected.
    """
    s = np.asarray(s, dtype=complex)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"need a square matrix, got shape {s.shape}")
    scale = max(1.0, float(np.abs(s).max()))
    if not np.allclose(s, s.conj().T, rtol=0.0, atol=1e-10 * scale):
        raise ValueError("matrix must be Hermitian")
    eigvals, eigvecs = np.linalg.eigh(s)
    if eigvals.min() <= tol * max(eigvals.max(), 0.0):
        raise ValueError("matrix must be positive definite")
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.conj().T
    return 0.5 * (root + root.conj().T)
