"""Pilot design, LS channel estimation and power allocation for OFDM
full-duplex relay links with transmit/receive IQ imbalance."""

from .allocation import (
    PowerSplit,
    SnrPoint,
    epa,
    opa,
    power_for_snr,
    received_snr,
    rho_opt,
    sum_mse_epa,
    sum_mse_given_powers,
    sum_mse_global_min,
    sum_mse_opa,
)
from .channel import ChannelConfig, FreqChannel, image_index, sample_channel
from .estimator import (
    EstimateReport,
    ReceiveBlock,
    empirical_sum_mse,
    estimate_once,
    ls_estimate,
    simulate_received,
)
from .iqmodel import (
    GammaVec,
    IqCoeffs,
    IqParams,
    NodeIqProfile,
    NoiseCov,
    composite_pair_channels,
    iq_coefficients,
    make_profile,
    noise_cov,
)
from .oracle import (
    KktReport,
    kkt_residual,
    numeric_pilot_optimum,
    numeric_power_optimum,
    numeric_rho_optimum,
    principal_sqrt_hpd,
)
from .pilot import (
    GramMatrix,
    PilotMatrix,
    ScaleB,
    analytic_sum_mse,
    build_pilot_conjugate_pair,
    build_pilot_dft,
    build_pilot_hadamard4,
    gram,
    is_optimal_pilot,
    optimal_gram,
    pilot_to_csv,
)
from .sweep import SweepConfig, SweepResult, reproduce_figure, run_sweep, snr_gain

__version__ = "0.1.0"
