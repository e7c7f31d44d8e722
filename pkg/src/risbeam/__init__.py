"""Beam-training overhead and SNR scaling for reconfigurable intelligent surfaces."""

from .analytic import Regime, classify_regime, snr_constants, snr_scaling
from .channel import RicianParams, generate_channels
from .codebook import build_hierarchy
from .mobility import generate_trajectory
from .overhead import Strategy, StrategyParams
from .scenario import SystemConfig, TimingConfig
from .simulator import SimSettings, make_setup, run_experiment

__all__ = ["Regime", "RicianParams", "SimSettings", "Strategy", "StrategyParams", "SystemConfig", "TimingConfig",
           "build_hierarchy", "classify_regime", "generate_channels", "generate_trajectory", "make_setup",
           "run_experiment", "snr_constants", "snr_scaling"]
