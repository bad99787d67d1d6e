"""Track the progression of reading through noisy eye-gaze measurements.

A constant-velocity Kalman filter smooths gaze samples; the slip variant
re-initializes whenever the horizontal velocity estimate drops below a
negative threshold, which marks a return to the start of the next line.
"""

from slipkf.errors import (
    FilterDivergenceError,
    FormatError,
    InvalidConfigError,
    InvalidInputError,
    InvalidStateError,
    SlipKFError,
)
from slipkf.filter import FilterState, StepOutput, kf_step, nis, slip_kf_step, two_point_init
from slipkf.model import (
    Measurement,
    MeasurementModel,
    ModelConfig,
    ProcessModel,
    StateVector,
    build_measurement_model,
    build_process_noise_cov,
    build_transition_matrix,
    derive_noise_intensity,
)
from slipkf.simulate import SimConfig, simulate_linear_gaussian, simulate_reading
from slipkf.trace import PageTrace
from slipkf.tracker import (
    LineStat,
    TrackResult,
    assign_lines,
    line_detection_accuracy,
    line_stats,
    track_page,
)

__all__ = [
    "FilterDivergenceError",
    "FilterState",
    "FormatError",
    "InvalidConfigError",
    "InvalidInputError",
    "InvalidStateError",
    "LineStat",
    "Measurement",
    "MeasurementModel",
    "ModelConfig",
    "PageTrace",
    "ProcessModel",
    "SimConfig",
    "SlipKFError",
    "StateVector",
    "StepOutput",
    "TrackResult",
    "assign_lines",
    "build_measurement_model",
    "build_process_noise_cov",
    "build_transition_matrix",
    "derive_noise_intensity",
    "kf_step",
    "line_detection_accuracy",
    "line_stats",
    "nis",
    "simulate_linear_gaussian",
    "simulate_reading",
    "slip_kf_step",
    "track_page",
    "two_point_init",
]
