"""Trace-driven simulator and controller library for adaptive-bitrate streaming."""

from __future__ import annotations

from .control import (
    ControlError,
    PidParams,
    PidState,
    RampSchedule,
    damping_ratio,
    is_valid_gain_pair,
    natural_frequency,
    velocity_constant,
)
from .engine import (
    Decision,
    EstimatorSpec,
    SessionLog,
    SimConfig,
    SimulationError,
    StartupRule,
    simulate_session,
)
from .media import (
    BandwidthTrace,
    ChunkClass,
    MediaError,
    VideoManifest,
    classify_chunks,
    parse_manifest,
    parse_trace,
)
from .metrics import (
    MetricsReport,
    OfflineObjective,
    QoeWeights,
    brute_force_optimal,
    default_weights,
    offline_optimal,
    qoe_score,
    score_sequence,
    session_metrics,
)
from .schemes import (
    SCHEMES,
    AbrScheme,
    BufferAwareRate,
    BufferBased,
    Cava,
    CavaParams,
    ConfigError,
    DecisionContext,
    FilterSpec,
    Mpc,
    Pia,
    PiaParams,
    PiaStartup,
    Quad,
    QuadParams,
    RateBased,
    RobustMpc,
    allowed_from_filter,
    cbf_filter,
    make_scheme,
    tbf_filter,
)
from .tuning import GainGrid, HeatMap, Region, extract_region, sweep_gains

__all__ = [
    "SCHEMES",
    "AbrScheme",
    "BandwidthTrace",
    "BufferAwareRate",
    "BufferBased",
    "Cava",
    "CavaParams",
    "ChunkClass",
    "ConfigError",
    "ControlError",
    "Decision",
    "DecisionContext",
    "EstimatorSpec",
    "FilterSpec",
    "GainGrid",
    "HeatMap",
    "MediaError",
    "MetricsReport",
    "Mpc",
    "OfflineObjective",
    "Pia",
    "PiaParams",
    "PiaStartup",
    "PidParams",
    "PidState",
    "QoeWeights",
    "Quad",
    "QuadParams",
    "RampSchedule",
    "RateBased",
    "Region",
    "RobustMpc",
    "SessionLog",
    "SimConfig",
    "SimulationError",
    "StartupRule",
    "VideoManifest",
    "allowed_from_filter",
    "brute_force_optimal",
    "cbf_filter",
    "classify_chunks",
    "damping_ratio",
    "default_weights",
    "extract_region",
    "is_valid_gain_pair",
    "make_scheme",
    "natural_frequency",
    "offline_optimal",
    "parse_manifest",
    "parse_trace",
    "qoe_score",
    "score_sequence",
    "session_metrics",
    "simulate_session",
    "sweep_gains",
    "tbf_filter",
    "velocity_constant",
]
