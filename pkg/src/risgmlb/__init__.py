"""Gradient-based meta-learning beamforming for RIS-aided MU-MISO downlinks."""

from risgmlb.channel import ChannelSet, RicianParams, generate_channel, generate_scenario_batch
from risgmlb.errors import ConfigError, NumericError, ShapeError
from risgmlb.objective import (
    BeamformingState,
    NoiseModel,
    grad_sum_rate_wrt_theta,
    grad_sum_rate_wrt_W,
    noise_from_snr,
    project_power,
    sinr_per_user,
    sum_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BeamformingState",
    "ChannelSet",
    "ConfigError",
    "NoiseModel",
    "NumericError",
    "RicianParams",
    "ShapeError",
    "generate_channel",
    "generate_scenario_batch",
    "grad_sum_rate_wrt_W",
    "grad_sum_rate_wrt_theta",
    "noise_from_snr",
    "project_power",
    "sinr_per_user",
    "sum_rate",
]
