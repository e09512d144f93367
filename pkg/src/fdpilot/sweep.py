"""Experiment harness: Sum-MSE sweeps over rho or receive SNR, for the
proportional and equal power-allocation policies, analytic and Monte Carlo.

Each sweep row fixes one axis value and one policy, matches the power split
to the target receive SNR, and evaluates the closed-form Sum-MSE; when
trials > 0 it also runs the LS estimator Monte Carlo with the optimal pilot
construction at the same split.
"""

from __future__ import annotations

import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allocation import (
    POLICIES,
    SnrPoint,
    power_for_snr,
    rho_opt,
    sum_mse_epa,
    sum_mse_opa,
)
from .channel import ChannelConfig
from .estimator import empirical_sum_mse
from .iqmodel import IqParams, make_profile
from .pilot import ScaleB, build_pilot_conjugate_pair, build_pilot_hadamard4

CSV_HEADER = "axis,axis_value,policy,sum_mse_analytic,sum_mse_empirical,trials,seed"

AXES = ("rho", "snr_db")

DEFAULT_RHO_GRID = np.logspace(math.log10(1.0 / 64.0), math.log10(64.0), 49)
DEFAULT_SNR_DB_GRID = np.linspace(0.0, 40.0, 41)
DEFAULT_FIGURE_SNRS_DB = (10.0, 20.0, 30.0)

_ASYMMETRIC_IQ = {
    "tx_source": (5.0, 1.0),
    "tx_relay": (1.0, 1.0),
    "rx_relay": (1.0, 1.0),
}
_SYMMETRIC_IQ = {
    "tx_source": (1.0, 1.0),
    "tx_relay": (1.0, 1.0),
    "rx_relay": (1.0, 1.0),
}


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: the swept axis, the fixed counterpart, and the scenario."""

    axis: str = "snr_db"
    axis_values: tuple[float, ...] = tuple(DEFAULT_SNR_DB_GRID)
    fixed_rho: float | None = 1.0
    fixed_snr_db: float | None = None
    iq_tx_source: IqParams = field(default_factory=lambda: IqParams(1.0, 1.0))
    iq_tx_relay: IqParams = field(default_factory=lambda: IqParams(1.0, 1.0))
    iq_rx_relay: IqParams = field(default_factory=lambda: IqParams(1.0, 1.0))
    n_pilot: int = 4
    policies: tuple[str, ...] = ("opa", "epa")
    trials: int = 0
    master_seed: int = 12345
    sigma_v2: float = 1.0
    channel: ChannelConfig = field(default_factory=ChannelConfig)

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.axis_values)
        if not values:
            raise ValueError("axis_values must be nonempty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("axis_values must be strictly increasing")
        object.__setattr__(self, "axis_values", values)
        if self.axis == "rho":
            if self.fixed_snr_db is None:
                raise ValueError("a rho sweep needs fixed_snr_db")
            if any(v <= 0.0 for v in values):
                raise ValueError("rho values must be positive")
        else:
            if self.fixed_rho is None:
                raise ValueError("an snr_db sweep needs fixed_rho")
            if self.fixed_rho <= 0.0:
                raise ValueError("fixed_rho must be positive")
        if not self.policies or any(p not in POLICIES for p in self.policies):
            raise ValueError(f"policies must be a nonempty subset of {POLICIES}")
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")
        if self.sigma_v2 <= 0.0:
            raise ValueError(f"sigma_v2 must be positive, got {self.sigma_v2}")
        if self.n_pilot < 4:
            raise ValueError(f"need n_pilot >= 4, got {self.n_pilot}")


@dataclass(frozen=True)
class SweepRow:
    """One (axis value, policy) record."""

    axis: str
    axis_value: float
    policy: str
    sum_mse_analytic: float
    sum_mse_empirical: float | None
    trials: int
    seed: int


@dataclass(frozen=True, eq=False)
class SweepResult:
    """All rows of one sweep, in axis-major, policy-minor order."""

    config: SweepConfig
    rows: tuple[SweepRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            empirical = "" if r.sum_mse_empirical is None else f"{r.sum_mse_empirical:.16e}"
            buf.write(
                f"{r.axis},{r.axis_value:.16e},{r.policy},"
                f"{r.sum_mse_analytic:.16e},{empirical},{r.trials},{r.seed}\n"
            )
        return buf.getvalue()

    def policy_arrays(self, policy: str) -> tuple[np.ndarray, np.ndarray]:
        """(axis values, analytic Sum-MSE) of one policy, in axis order."""
        picked = [r for r in self.rows if r.policy == policy]
        if not picked:
            raise ValueError(f"no rows for policy {policy!r}")
        return (
            np.array([r.axis_value for r in picked]),
            np.array([r.sum_mse_analytic for r in picked]),
        )


def _row_seed(master_seed: int, row_index: int) -> int:
    state = np.random.SeedSequence([master_seed, row_index]).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def _compute_row(task: tuple[SweepConfig, float, str, int]) -> SweepRow:
    cfg, axis_value, policy, seed = task
    profile = make_profile(cfg.iq_tx_source, cfg.iq_tx_relay, cfg.iq_rx_relay)
    if cfg.axis == "rho":
        rho = axis_value
        gamma = SnrPoint.from_db(cfg.fixed_snr_db)
    else:
        rho = cfg.fixed_rho
        gamma = SnrPoint.from_db(axis_value)
    analytic = (
        sum_mse_opa(rho, gamma, profile, cfg.n_pilot)
        if policy == "opa"
        else sum_mse_epa(rho, gamma, profile, cfg.n_pilot)
    )
    empirical = None
    if cfg.trials > 0:
        split = power_for_snr(gamma, rho, profile, cfg.sigma_v2, policy)
        if cfg.n_pilot == 4:
            x = build_pilot_hadamard4(split.p_source, split.p_relay)
        else:
            x = build_pilot_conjugate_pair(cfg.n_pilot, split.p_source, split.p_relay)
        empirical = empirical_sum_mse(
            x,
            ScaleB(rho),
            profile,
            cfg.sigma_v2,
            cfg.trials,
            seed,
            channel_cfg=cfg.channel,
        )
    return SweepRow(
        axis=cfg.axis,
        axis_value=axis_value,
        policy=policy,
        sum_mse_analytic=analytic,
        sum_mse_empirical=empirical,
        trials=cfg.trials,
        seed=seed,
    )


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Evaluate every (axis value, policy) point of the sweep.

    Points are independent tasks; with workers > 1 they run in a process
    pool but are merged in axis order, so the result is identical for any
    worker count.
    """
    tasks = []
    idx = 0
    for value in cfg.axis_values:
        for policy in cfg.policies:
            tasks.append((cfg, value, policy, _row_seed(cfg.master_seed, idx)))
            idx += 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(_compute_row, tasks))
    else:
        rows = tuple(_compute_row(t) for t in tasks)
    return SweepResult(config=cfg, rows=rows)


def _figure_iq(fig_id: int) -> dict[str, IqParams]:
    source = _ASYMMETRIC_IQ if fig_id <= 4 else _SYMMETRIC_IQ
    return {name: IqParams(*vals) for name, vals in source.items()}


def figure_configs(fig_id: int, **overrides) -> list[SweepConfig]:
    """Preset sweep configurations behind one results figure.

    Figures 2 and 5 sweep rho at three receive SNRs; 3 and 6 sweep SNR at
    rho in {rho_opt, 1/4, 1/32}; 4 and 7 sweep SNR at rho in
    {rho_opt, 8, 32}. Figures 2-4 use the asymmetric IQ setup (source 5 dB,
    relay 1 dB, all phases 1 degree), figures 5-7 the symmetric one.
    Override keys: snrs_db, rhos, conversion_mode, plus any SweepConfig
    field (applied to every sub-sweep).
    """
    if fig_id not in range(2, 8):
        raise ValueError(f"figure id must lie in 2..7, got {fig_id}")
    iq = _figure_iq(fig_id)
    mode = overrides.pop("conversion_mode", None)
    if mode is not None:
        iq = {
            name: dataclasses.replace(p, conversion_mode=mode) for name, p in iq.items()
        }
    profile = make_profile(iq["tx_source"], iq["tx_relay"], iq["rx_relay"])
    snrs_db = tuple(overrides.pop("snrs_db", DEFAULT_FIGURE_SNRS_DB))
    if fig_id in (2, 5):
        rhos = ()
    elif fig_id in (3, 6):
        rhos = tuple(overrides.pop("rhos", (rho_opt(profile), 0.25, 1.0 / 32.0)))
    else:
        rhos = tuple(overrides.pop("rhos", (rho_opt(profile), 8.0, 32.0)))

    base = dict(
        iq_tx_source=iq["tx_source"],
        iq_tx_relay=iq["tx_relay"],
        iq_rx_relay=iq["rx_relay"],
    )
    base.update(overrides)
    configs = []
    if fig_id in (2, 5):
        for snr_db in snrs_db:
            configs.append(
                SweepConfig(
                    axis="rho",
                    axis_values=tuple(DEFAULT_RHO_GRID),
                    fixed_rho=None,
                    fixed_snr_db=snr_db,
                    **base,
                )
            )
    else:
        for rho in rhos:
            configs.append(
                SweepConfig(
                    axis="snr_db",
                    axis_values=tuple(DEFAULT_SNR_DB_GRID),
                    fixed_rho=rho,
                    fixed_snr_db=None,
                    **base,
                )
            )
    return configs


def reproduce_figure(fig_id: int, workers: int = 1, **overrides) -> list[SweepResult]:
    """Run every sub-sweep of one figure; one result per fixed parameter."""
    return [run_sweep(cfg, workers=workers) for cfg in figure_configs(fig_id, **overrides)]


def snr_gain(result: SweepResult, at_sum_mse: float) -> float:
    """Horizontal SNR gap (dB) between the equal-split and the proportional
    curves at a given Sum-MSE level, by log-linear interpolation."""
    if result.config.axis != "snr_db":
        raise ValueError("SNR gain needs an snr_db-axis sweep")
    if at_sum_mse <= 0.0:
        raise ValueError("the Sum-MSE level must be positive")

    def snr_at_level(policy: str) -> float:
        snr_db, mse = result.policy_arrays(policy)
        if not (mse.min() <= at_sum_mse <= mse.max()):
            raise ValueError(
                f"level {at_sum_mse} outside the {policy} curve range "
                f"[{mse.min()}, {mse.max()}]"
            )
        # mse decreases with SNR; interpolate SNR against log-mse ascending
        order = np.argsort(mse)
        return float(np.interp(math.log10(at_sum_mse), np.log10(mse[order]), snr_db[order]))

    return snr_at_level("epa") - snr_at_level("opa")
