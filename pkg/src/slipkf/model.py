"""Constant-velocity state-space model of eye-gaze during reading.

State ordering is fixed as ``[x, x_dot, y, y_dot]`` everywhere in the package.
Positions are in page units: ``x`` in page-widths (0 = left edge of the text
region, 1 = right edge) and ``y`` in page-heights (0 = top, growing downward).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from slipkf.errors import InvalidConfigError

DEFAULT_DELTA_T = 1.0 / 64.0
READING_VELOCITY = 0.2 / 3.0
SLIP_THRESHOLD = -0.5

# Reading-rate heuristic used for the default noise intensities.
_SECONDS_PER_LINE = 10.0
_LINES_PER_PAGE = 25
_NOISE_FRACTION = 0.01


class StateVector(NamedTuple):
    """Kinematic gaze state in page units."""

    x: float
    x_dot: float
    y: float
    y_dot: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    @classmethod
    def from_array(cls, values) -> StateVector:
        values = np.asarray(values, dtype=float).reshape(4)
        return cls(*(float(v) for v in values))


class Measurement(NamedTuple):
    """A single gaze sample: timestamp in seconds and observed position."""

    t: float
    z_x: float
    z_y: float


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidConfigError(message)


def _positive(name: str, value: float) -> None:
    _require(math.isfinite(value) and value > 0, f"{name} must be finite and > 0, got {value!r}")


def _non_negative(name: str, value: float) -> None:
    _require(math.isfinite(value) and value >= 0, f"{name} must be finite and >= 0, got {value!r}")


def derive_noise_intensity(
    extent: float, traverse_seconds: float, noise_fraction: float, delta_t: float
) -> float:
    """Process-noise intensity from a reading-rate heuristic.

    The mean velocity is ``extent / traverse_seconds``. Allowing the velocity
    to wander by ``noise_fraction`` of that value per sample gives
    ``sqrt(delta_t**2 * q) = v * noise_fraction``.

    Args:
        extent: Distance covered (any length unit).
        traverse_seconds: Time taken to cover ``extent``.
        noise_fraction: Allowed relative velocity change per sample.
        delta_t: Sampling interval in seconds.

    Returns:
        The intensity ``q = (v * noise_fraction / delta_t) ** 2``.
    """
    for name, value in (
        ("extent", extent),
        ("traverse_seconds", traverse_seconds),
        ("noise_fraction", noise_fraction),
        ("delta_t", delta_t),
    ):
        _positive(name, value)
    velocity = extent / traverse_seconds
    return (velocity * noise_fraction / delta_t) ** 2


def default_q_x(delta_t: float = DEFAULT_DELTA_T) -> float:
    return derive_noise_intensity(1.0, _SECONDS_PER_LINE, _NOISE_FRACTION, delta_t)


def default_q_y(delta_t: float = DEFAULT_DELTA_T) -> float:
    return derive_noise_intensity(
        1.0 / _LINES_PER_PAGE, _SECONDS_PER_LINE, _NOISE_FRACTION, delta_t
    )


@dataclass(frozen=True)
class ModelConfig:
    """All tunables of the regular and slip Kalman filters.

    ``refractory_samples`` is the minimum number of filter steps between two
    slip resets (the initialization counts as a reset). It keeps a single
    line return, and the noisy velocity estimate right after a
    re-initialization, from firing more than once.
    """

    delta_t: float = DEFAULT_DELTA_T
    q_x: float = field(default_factory=default_q_x)
    q_y: float = field(default_factory=default_q_y)
    sigma_x: float = 0.01
    sigma_y: float = 0.005
    gamma: float = 1.0
    slip_threshold: float = SLIP_THRESHOLD
    reinit_x_velocity: float = READING_VELOCITY
    refractory_samples: int = 32

    def __post_init__(self) -> None:
        _positive("delta_t", self.delta_t)
        _non_negative("q_x", self.q_x)
        _non_negative("q_y", self.q_y)
        _positive("sigma_x", self.sigma_x)
        _positive("sigma_y", self.sigma_y)
        _positive("gamma", self.gamma)
        # -inf is allowed: it disables slipping entirely.
        _require(
            not math.isnan(self.slip_threshold) and self.slip_threshold < 0,
            f"slip_threshold must be < 0, got {self.slip_threshold!r}",
        )
        _positive("reinit_x_velocity", self.reinit_x_velocity)
        _require(
            isinstance(self.refractory_samples, (int, np.integer))
            and not isinstance(self.refractory_samples, bool)
            and self.refractory_samples >= 0,
            f"refractory_samples must be a non-negative integer, got {self.refractory_samples!r}",
        )

    @classmethod
    def for_sampling_interval(cls, delta_t: float, **overrides) -> ModelConfig:
        """Defaults with the noise intensities re-derived for ``delta_t``."""
        _positive("delta_t", delta_t)
        values = {"q_x": default_q_x(delta_t), "q_y": default_q_y(delta_t)}
        values.update(overrides)
        return cls(delta_t=delta_t, **values)

    def process_model(self) -> ProcessModel:
        return ProcessModel(
            f=build_transition_matrix(self.delta_t),
            q=build_process_noise_cov(self.delta_t, self.q_x, self.q_y),
        )

    def measurement_model(self) -> MeasurementModel:
        return build_measurement_model(self.sigma_x, self.sigma_y)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ProcessModel:
    """State transition ``f`` and process noise covariance ``q``."""

    f: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "f", _frozen(self.f))
        object.__setattr__(self, "q", _frozen(self.q))
        if self.f.shape != (4, 4) or self.q.shape != (4, 4):
            raise InvalidConfigError("process model matrices must be 4x4")


@dataclass(frozen=True)
class MeasurementModel:
    """Position selector ``h`` and measurement noise covariance ``r``."""

    h: np.ndarray
    r: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", _frozen(self.h))
        object.__setattr__(self, "r", _frozen(self.r))
        if self.h.shape != (2, 4) or self.r.shape != (2, 2):
            raise InvalidConfigError("measurement model must have h 2x4 and r 2x2")


def build_transition_matrix(delta_t: float) -> np.ndarray:
    """Constant-velocity transition matrix for the ``[x, x_dot, y, y_dot]`` state."""
    _positive("delta_t", delta_t)
    f = np.eye(4)
    f[0, 1] = delta_t
    f[2, 3] = delta_t
    return f


def build_process_noise_cov(delta_t: float, q_x: float, q_y: float) -> np.ndarray:
    """Discrete white-noise-acceleration covariance, one 2x2 block per axis."""
    _positive("delta_t", delta_t)
    _non_negative("q_x", q_x)
    _non_negative("q_y", q_y)
    dt2 = delta_t * delta_t
    block = np.array([[dt2 * dt2 / 4.0, dt2 * delta_t / 2.0], [dt2 * delta_t / 2.0, dt2]])
    q = np.zeros((4, 4))
    q[:2, :2] = block * q_x
    q[2:, 2:] = block * q_y
    return q


def build_measurement_model(sigma_x: float, sigma_y: float) -> MeasurementModel:
    _positive("sigma_x", sigma_x)
    _positive("sigma_y", sigma_y)
    h = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    r = np.diag([sigma_x**2, sigma_y**2])
    return MeasurementModel(h=h, r=r)
