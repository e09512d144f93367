"""Command-line front end: config ingestion, sweep/figure/pilot/mse
subcommands, CSV emission, and the numerical verification suites."""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import allocation, oracle
from .allocation import SnrPoint, power_for_snr, rho_opt, sum_mse_opa
from .channel import ChannelConfig
from .estimator import empirical_sum_mse
from .iqmodel import IqParams, make_profile, noise_cov
from .pilot import (
    ScaleB,
    build_pilot_conjugate_pair,
    build_pilot_hadamard4,
    is_optimal_pilot,
    optimal_gram,
    pilot_to_csv,
)
from .sweep import (
    DEFAULT_RHO_GRID,
    DEFAULT_SNR_DB_GRID,
    SweepConfig,
    reproduce_figure,
    run_sweep,
)

VERIFY_SUITES = ("kkt", "pilot", "power", "rho", "lemma1", "convexity", "all")


class ConfigError(ValueError):
    """Configuration file or flag rejected, with the offending field path."""


@dataclass(frozen=True)
class RunConfig:
    """Full experiment configuration: the sweep scenario plus pilot powers
    and the output path."""

    sweep: SweepConfig
    p_source: float = 1.0
    p_relay: float = 1.0
    output: str | None = None


_IQ_CHAIN_SCHEMA = {"alpha_db": float, "theta_deg": float}

_SCHEMA = {
    "sweep": {
        "axis": str,
        "axis_values": list,
        "fixed_rho": float,
        "fixed_snr_db": float,
        "n_pilot": int,
        "policies": list,
        "trials": int,
        "master_seed": int,
        "sigma_v2": float,
    },
    "channel": {
        "n_subcarriers": int,
        "cp_len": int,
        "n_taps": int,
        "pdp": str,
        "decay": float,
        "avg_gain": float,
    },
    "iq": {
        "conversion_mode": str,
        "tx_source": _IQ_CHAIN_SCHEMA,
        "tx_relay": _IQ_CHAIN_SCHEMA,
        "rx_relay": _IQ_CHAIN_SCHEMA,
    },
    "pilot": {"p_source": float, "p_relay": float},
    "output": str,
}


def _check_keys(data: dict, schema: dict, path: str = "") -> None:
    for key, value in data.items():
        where = f"{path}{key}"
        if key not in schema:
            raise ConfigError(f"unknown config key: {where}")
        expected = schema[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where} must be a mapping")
            _check_keys(value, expected, where + ".")
        elif expected is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{where} must be a number")
        elif expected is int:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{where} must be an integer")
        elif expected is list:
            if not isinstance(value, list):
                raise ConfigError(f"{where} must be a list")
        elif expected is str:
            if not isinstance(value, str):
                raise ConfigError(f"{where} must be a string")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    raw = Path(path).read_text()
    data = yaml.safe_load(raw)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a mapping at the top level")
    _check_keys(data, _SCHEMA)
    return data


def parse_config(path: str | None = None, flags: dict | None = None) -> RunConfig:
    """Build the run configuration from an optional YAML file and flag
    overrides; flags win over file values, defaults fill the rest."""
    data = _load_config_file(path)
    flags = {k: v for k, v in (flags or {}).items() if v is not None}

    sweep_section = dict(data.get("sweep", {}))
    channel_section = dict(data.get("channel", {}))
    iq_section = dict(data.get("iq", {}))
    pilot_section = dict(data.get("pilot", {}))

    if "seed" in flags:
        sweep_section["master_seed"] = flags["seed"]
    if "trials" in flags:
        sweep_section["trials"] = flags["trials"]
    if "rho" in flags:
        sweep_section["fixed_rho"] = flags["rho"]
    if "snr_db" in flags:
        sweep_section["fixed_snr_db"] = flags["snr_db"]
    if "np" in flags:
        sweep_section["n_pilot"] = flags["np"]
    if "alloc" in flags:
        sweep_section["policies"] = [flags["alloc"]]
    if "iq_mode" in flags:
        iq_section["conversion_mode"] = flags["iq_mode"]

    mode = iq_section.get("conversion_mode", "deviation")

    def chain(name: str) -> IqParams:
        section = dict(iq_section.get(name, {}))
        try:
            return IqParams(
                alpha_db=float(section.get("alpha_db", 1.0)),
                theta_deg=float(section.get("theta_deg", 1.0)),
                conversion_mode=mode,
            )
        except ValueError as exc:
            raise ConfigError(f"iq.{name}: {exc}") from exc

    try:
        channel_cfg = ChannelConfig(**channel_section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"channel: {exc}") from exc

    axis = sweep_section.pop("axis", "snr_db")
    axis_values = sweep_section.pop("axis_values", None)
    if axis_values is None:
        axis_values = DEFAULT_RHO_GRID if axis == "rho" else DEFAULT_SNR_DB_GRID
    policies = tuple(sweep_section.pop("policies", ("opa", "epa")))
    fixed_rho = sweep_section.pop("fixed_rho", 1.0 if axis == "snr_db" else None)
    fixed_snr_db = sweep_section.pop("fixed_snr_db", None)
    try:
        sweep_cfg = SweepConfig(
            axis=axis,
            axis_values=tuple(axis_values),
            fixed_rho=fixed_rho,
            fixed_snr_db=fixed_snr_db,
            iq_tx_source=chain("tx_source"),
            iq_tx_relay=chain("tx_relay"),
            iq_rx_relay=chain("rx_relay"),
            policies=policies,
            channel=channel_cfg,
            **sweep_section,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from exc

    return RunConfig(
        sweep=sweep_cfg,
        p_source=float(pilot_section.get("p_source", 1.0)),
        p_relay=float(pilot_section.get("p_relay", 1.0)),
        output=flags.get("out", data.get("output")),
    )


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _suffixed_path(path: str | None, suffix: str) -> str | None:
    if path is None:
        return None
    p = Path(path)
    return str(p.with_name(p.stem + suffix + (p.suffix or ".csv")))


# ---------------------------------------------------------------------------
# verification suites

def _suite_kkt(rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    worst_stat, worst_slack = 0.0, 0.0
    for _ in range(100):
        p_s, p_r = rng.uniform(0.1, 10.0, size=2)
        rho = 10.0 ** rng.uniform(-1.5, 1.5)
        n_p = int(rng.integers(4, 17))
        report = oracle.kkt_residual(
            optimal_gram(n_p, p_s, p_r), ScaleB(rho), p_s, p_r, n_p
        )
        worst_stat = max(worst_stat, report.stationarity_residual)
        worst_slack = max(worst_slack, report.slackness_s, report.slackness_r)
    return [
        ("kkt.stationarity_at_optimum", worst_stat < 1e-10, f"residual={worst_stat:.3e} tol=1e-10"),
        ("kkt.active_power_traces", worst_slack < 1e-12, f"residual={worst_slack:.3e} tol=1e-12"),
    ]


def _suite_pilot(rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    checks = []
    worst_gap, worst_offdiag = 0.0, 0.0
    all_converged = True
    for i in range(3):
        p_s, p_r = rng.uniform(0.2, 5.0, size=2)
        rho = 10.0 ** rng.uniform(-1.0, 1.0)
        result = oracle.numeric_pilot_optimum(p_s, p_r, rho, 4, seed=int(rng.integers(2**31)))
        analytic = (2.0 / 4) * (1.0 / p_s + 1.0 / (rho**2 * p_r))
        worst_gap = max(worst_gap, abs(result.objective - analytic) / analytic)
        e = result.gram.entries
        offdiag = np.abs(e - np.diag(np.diag(e))).max() / np.abs(np.diag(e)).max()
        worst_offdiag = max(worst_offdiag, offdiag)
        all_converged = all_converged and result.converged
    checks.append(
        ("pilot.descent_matches_analytic", worst_gap < 1e-3 and all_converged,
         f"residual={worst_gap:.3e} tol=1e-3")
    )
    checks.append(
        ("pilot.descent_gram_diagonal", worst_offdiag < 1e-3, f"residual={worst_offdiag:.3e} tol=1e-3")
    )
    constructions = (
        build_pilot_hadamard4(2.0, 0.5),
        build_pilot_conjugate_pair(5, 1.5, 0.7),
        build_pilot_hadamard4(1.0, 1.0),
    )
    ok = all(is_optimal_pilot(x) for x in constructions)
    checks.append(("pilot.constructions_optimal", ok, "residual=0 tol=1e-9"))
    return checks


def _suite_power(rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    cw = noise_cov(make_profile(IqParams(1, 1), IqParams(1, 1), IqParams(1, 1)).rx_relay, 1.0)
    worst = 0.0
    for _ in range(20):
        p_total = rng.uniform(0.5, 20.0)
        rho = 10.0 ** rng.uniform(-1.5, 1.5)
        found = oracle.numeric_power_optimum(p_total, rho, 4, cw, grid_points=1999)
        worst = max(worst, abs(found - rho * p_total / (1.0 + rho)) / p_total)
    return [("power.grid_matches_closed_form", worst < 1e-3, f"residual={worst:.3e} tol=1e-3")]


def _suite_rho(_: np.random.Generator) -> list[tuple[str, bool, str]]:
    gamma = SnrPoint.from_db(20.0)
    sym = make_profile(IqParams(1, 1), IqParams(1, 1), IqParams(1, 1))
    asym = make_profile(IqParams(5, 1), IqParams(1, 1), IqParams(1, 1))
    r_sym = oracle.numeric_rho_optimum(gamma, sym, 4)
    r_asym = oracle.numeric_rho_optimum(gamma, asym, 4)
    gap_asym = abs(r_asym - rho_opt(asym)) / rho_opt(asym)
    return [
        ("rho.symmetric_profile_optimum_is_one", abs(r_sym - 1.0) < 1e-4,
         f"residual={abs(r_sym - 1.0):.3e} tol=1e-4"),
        ("rho.numeric_matches_closed_form", gap_asym < 1e-3, f"residual={gap_asym:.3e} tol=1e-3"),
    ]


def _suite_lemma1(rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 9))
        f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        s = f @ f.conj().T + n * np.eye(n)
        p = oracle.principal_sqrt_hpd(s)
        worst = max(worst, np.linalg.norm(p @ p - s) / np.linalg.norm(s))
    return [("lemma1.sqrt_reconstruction", worst < 1e-10, f"residual={worst:.3e} tol=1e-10")]


def _suite_convexity(_: np.random.Generator) -> list[tuple[str, bool, str]]:
    gamma = SnrPoint.from_db(20.0)
    profile = make_profile(IqParams(5, 1), IqParams(1, 1), IqParams(1, 1))
    grid = np.logspace(math.log10(1 / 64), math.log10(64), 97)
    values = np.array([sum_mse_opa(r, gamma, profile, 4) for r in grid])
    second = values[:-2] - 2 * values[1:-1] + values[2:]
    convex_ok = bool(np.all(second > 0.0))
    r_o = rho_opt(profile)
    h = 1e-4 * r_o
    deriv = (sum_mse_opa(r_o + h, gamma, profile, 4) - sum_mse_opa(r_o - h, gamma, profile, 4)) / (
        2 * h
    )
    rel = abs(deriv) * r_o / sum_mse_opa(r_o, gamma, profile, 4)
    return [
        ("convexity.second_differences_positive", convex_ok,
         f"residual={float(second.min()):.3e} tol=>0"),
        ("convexity.stationary_at_rho_opt", rel < 1e-6, f"residual={rel:.3e} tol=1e-6"),
    ]


_SUITES = {
    "kkt": _suite_kkt,
    "pilot": _suite_pilot,
    "power": _suite_power,
    "rho": _suite_rho,
    "lemma1": _suite_lemma1,
    "convexity": _suite_convexity,
}


def run_verification(suite: str, seed: int = 12345) -> list[tuple[str, bool, str]]:
    """Run one named verification suite (or all) and collect check results."""
    names = list(_SUITES) if suite == "all" else [suite]
    results = []
    for name in names:
        rng = np.random.default_rng([seed, sum(map(ord, name))])
        results.extend(_SUITES[name](rng))
    return results


# ---------------------------------------------------------------------------
# subcommands

def _cmd_pilot(cfg: RunConfig) -> int:
    n_p = cfg.sweep.n_pilot
    if n_p == 4:
        x = build_pilot_hadamard4(cfg.p_source, cfg.p_relay)
    else:
        x = build_pilot_conjugate_pair(n_p, cfg.p_source, cfg.p_relay)
    _write_text(cfg.output, pilot_to_csv(x))
    return 0


def _cmd_sweep(cfg: RunConfig, workers: int) -> int:
    result = run_sweep(cfg.sweep, workers=workers)
    _write_text(cfg.output, result.to_csv())
    return 0


def _cmd_figure(cfg: RunConfig, fig_id: int, workers: int) -> int:
    results = reproduce_figure(
        fig_id,
        workers=workers,
        trials=cfg.sweep.trials,
        master_seed=cfg.sweep.master_seed,
        sigma_v2=cfg.sweep.sigma_v2,
        n_pilot=cfg.sweep.n_pilot,
    )
    for res in results:
        if res.config.axis == "rho":
            suffix = f"_snr{res.config.fixed_snr_db:g}db"
        else:
            suffix = f"_rho{res.config.fixed_rho:g}"
        _write_text(_suffixed_path(cfg.output, suffix), res.to_csv())
    return 0


def _cmd_mse(cfg: RunConfig) -> int:
    sweep_cfg = cfg.sweep
    rho = sweep_cfg.fixed_rho if sweep_cfg.fixed_rho is not None else 1.0
    snr_db = sweep_cfg.fixed_snr_db if sweep_cfg.fixed_snr_db is not None else 20.0
    gamma = SnrPoint.from_db(snr_db)
    profile = make_profile(
        sweep_cfg.iq_tx_source, sweep_cfg.iq_tx_relay, sweep_cfg.iq_rx_relay
    )
    policy = sweep_cfg.policies[0] if len(sweep_cfg.policies) == 1 else "opa"
    analytic = (
        sum_mse_opa(rho, gamma, profile, sweep_cfg.n_pilot)
        if policy == "opa"
        else allocation.sum_mse_epa(rho, gamma, profile, sweep_cfg.n_pilot)
    )
    print(f"policy={policy} rho={rho:.16e} snr_db={snr_db:.16e}")
    print(f"sum_mse_analytic={analytic:.16e}")
    if sweep_cfg.trials > 0:
        split = power_for_snr(gamma, rho, profile, sweep_cfg.sigma_v2, policy)
        if sweep_cfg.n_pilot == 4:
            x = build_pilot_hadamard4(split.p_source, split.p_relay)
        else:
            x = build_pilot_conjugate_pair(sweep_cfg.n_pilot, split.p_source, split.p_relay)
        empirical = empirical_sum_mse(
            x,
            ScaleB(rho),
            profile,
            sweep_cfg.sigma_v2,
            sweep_cfg.trials,
            sweep_cfg.master_seed,
            channel_cfg=sweep_cfg.channel,
        )
        print(f"sum_mse_empirical={empirical:.16e} trials={sweep_cfg.trials}")
    return 0


def _cmd_verify(suite: str, seed: int) -> int:
    results = run_verification(suite, seed=seed)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name} {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="YAML configuration file")
    parser.add_argument("--out", metavar="PATH", help="output CSV path (default stdout)")
    parser.add_argument("--seed", type=int, metavar="U64", help="master seed")
    parser.add_argument("--trials", type=int, metavar="N", help="Monte Carlo trials per point (0 = analytic only)")
    parser.add_argument("--rho", type=float, metavar="F", help="fixed self-interference ratio")
    parser.add_argument("--snr-db", type=float, metavar="F", help="fixed receive SNR in dB")
    parser.add_argument("--np", type=int, metavar="N", help="number of pilot OFDM symbols")
    parser.add_argument("--alloc", choices=("opa", "epa"), help="restrict to one allocation policy")
    parser.add_argument(
        "--workers", type=int, metavar="N", default=os.cpu_count() or 1,
        help="parallel workers (default: machine parallelism)",
    )
    parser.add_argument(
        "--iq-mode", choices=("deviation", "ratio"), dest="iq_mode",
        help="dB-to-linear conversion of the amplitude imbalance",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdpilot",
        description="Pilot design, LS channel estimation and power allocation "
        "for full-duplex OFDM relay links with IQ imbalance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("pilot", "emit an optimal pilot matrix as CSV"),
        ("sweep", "run a Sum-MSE sweep and emit CSV"),
        ("figure", "reproduce a results-figure dataset"),
        ("verify", "run the numerical verification suites"),
        ("mse", "analytic and Monte Carlo Sum-MSE at one operating point"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common_flags(p)
        if name == "figure":
            p.add_argument("--id", type=int, choices=range(2, 8), required=True, dest="fig_id")
        if name == "verify":
            p.add_argument("--suite", choices=VERIFY_SUITES, default="all")
    return parser


def dispatch(argv: list[str]) -> int:
    """Parse argv and run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    flags = {
        k: getattr(args, k, None)
        for k in ("out", "seed", "trials", "rho", "snr_db", "np", "alloc", "iq_mode")
    }
    try:
        cfg = parse_config(args.config, flags)
    except (ConfigError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command == "pilot":
        return _cmd_pilot(cfg)
    if args.command == "sweep":
        return _cmd_sweep(cfg, args.workers)
    if args.command == "figure":
        return _cmd_figure(cfg, args.fig_id, args.workers)
    if args.command == "mse":
        return _cmd_mse(cfg)
    if args.command == "verify":
        return _cmd_verify(args.suite, cfg.sweep.master_seed)
    raise AssertionError(f"unhandled command {args.command}")


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
