"""Regular and slip Kalman filter iterations.

Each step is a pure function: it takes a :class:`FilterState` and one
measurement and returns a :class:`StepOutput` holding the new state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from slipkf.errors import FilterDivergenceError, InvalidConfigError, InvalidStateError
from slipkf.model import Measurement, MeasurementModel, ModelConfig, ProcessModel, StateVector

MAX_CONDITION = 1e12
DET_FLOOR = 1e-300


@dataclass(frozen=True)
class FilterState:
    """Posterior estimate ``x_hat(k|k)`` and covariance ``P(k|k)``.

    ``since_reset`` counts the steps taken since the last slip reset or
    initialization; it drives the refractory rule of :func:`slip_kf_step`.
    """

    x_hat: np.ndarray
    p: np.ndarray
    k: int = 0
    since_reset: int = 0

    @property
    def state_vector(self) -> StateVector:
        return StateVector.from_array(self.x_hat)


@dataclass(frozen=True)
class StepOutput:
    """Result of one filter iteration.

    The innovation-related fields are ``None`` when ``reset`` is true, since
    no measurement update was performed.
    """

    state: FilterState
    predicted_measurement: Optional[np.ndarray]
    innovation: Optional[np.ndarray]
    innovation_cov: Optional[np.ndarray]
    nis: Optional[float]
    reset: bool = False


def two_point_init(
    z1: Measurement, z2: Measurement, delta_t: float, gamma: float
) -> FilterState:
    """Initialize from the first two measurements by finite differencing.

    The position is taken from ``z2`` and the velocity from ``(z2 - z1) / delta_t``;
    the covariance is ``gamma * I``.
    """
    if not (math.isfinite(delta_t) and delta_t > 0):
        raise InvalidConfigError(f"delta_t must be finite and > 0, got {delta_t!r}")
    if not (math.isfinite(gamma) and gamma > 0):
        raise InvalidConfigError(f"gamma must be finite and > 0, got {gamma!r}")
    values = (z1.z_x, z1.z_y, z2.z_x, z2.z_y)
    if not all(math.isfinite(v) for v in values):
        raise InvalidStateError("initialization measurements must be finite")
    x_hat = np.array(
        [
            z2.z_x,
            (z2.z_x - z1.z_x) / delta_t,
            z2.z_y,
            (z2.z_y - z1.z_y) / delta_t,
        ]
    )
    return FilterState(x_hat=x_hat, p=gamma * np.eye(4), k=0, since_reset=0)


def _invert_innovation_cov(s: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a symmetric 2x2 innovation covariance."""
    a, b, c, d = s[0, 0], s[0, 1], s[1, 0], s[1, 1]
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c) and math.isfinite(d)):
        raise FilterDivergenceError("innovation covariance is not finite")
    det = a * d - b * c
    # eigenvalues of the symmetrized matrix give an exact condition number
    off = 0.5 * (b + c)
    half_trace = 0.5 * (a + d)
    spread = math.hypot(0.5 * (a - d), off)
    lo, hi = half_trace - spread, half_trace + spread
    if lo <= 0.0 or det <= DET_FLOOR:
        raise FilterDivergenceError(f"innovation covariance is not positive definite: {s.tolist()}")
    if hi / lo > MAX_CONDITION:
        raise FilterDivergenceError(f"innovation covariance is ill-conditioned (cond={hi / lo:.3g})")
    return np.array([[d, -b], [-c, a]]) / det


def nis(innovation, innovation_cov) -> float:
    """Normalized innovation squared ``nu^T S^-1 nu``."""
    nu = np.asarray(innovation, dtype=float).reshape(2)
    s = np.asarray(innovation_cov, dtype=float).reshape(2, 2)
    if abs(s[0, 1] - s[1, 0]) > 1e-9 * max(1.0, abs(s[0, 1])):
        raise FilterDivergenceError("innovation covariance is not symmetric")
    s_inv = _invert_innovation_cov(s)
    return max(float(nu @ s_inv @ nu), 0.0)


def _check_finite(state: FilterState, z: Measurement) -> None:
    if not (math.isfinite(z.z_x) and math.isfinite(z.z_y)):
        raise InvalidStateError(f"measurement is not finite: {z!r}")
    if not (np.all(np.isfinite(state.x_hat)) and np.all(np.isfinite(state.p))):
        raise InvalidStateError("filter state is not finite")


def kf_step(
    state: FilterState, z: Measurement, process: ProcessModel, meas: MeasurementModel
) -> StepOutput:
    """One predict/update cycle of the regular Kalman filter."""
    _check_finite(state, z)
    f, q, h, r = process.f, process.q, meas.h, meas.r

    x_pred = f @ state.x_hat
    p_pred = f @ state.p @ f.T + q
    s = r + h @ p_pred @ h.T
    z_pred = h @ x_pred
    nu = np.array([z.z_x, z.z_y]) - z_pred

    s_inv = _invert_innovation_cov(s)
    w = p_pred @ h.T @ s_inv
    x_post = x_pred + w @ nu
    p_post = p_pred - w @ s @ w.T
    p_post = 0.5 * (p_post + p_post.T)

    return StepOutput(
        state=FilterState(
            x_hat=x_post, p=p_post, k=state.k + 1, since_reset=state.since_reset + 1
        ),
        predicted_measurement=z_pred,
        innovation=nu,
        innovation_cov=s,
        nis=max(float(nu @ s_inv @ nu), 0.0),
        reset=False,
    )


def should_slip(state: FilterState, config: ModelConfig) -> bool:
    """True when the current velocity estimate triggers a re-initialization."""
    if state.since_reset < config.refractory_samples:
        return False
    return bool(state.x_hat[1] < config.slip_threshold)


def reinitialize(state: FilterState, z: Measurement, config: ModelConfig) -> FilterState:
    """Restart the filter at the measurement, keeping the vertical velocity."""
    x_hat = np.array([z.z_x, config.reinit_x_velocity, z.z_y, state.x_hat[3]])
    return FilterState(x_hat=x_hat, p=config.gamma * np.eye(4), k=state.k + 1, since_reset=0)


def slip_kf_step(
    state: FilterState,
    z: Measurement,
    process: ProcessModel,
    meas: MeasurementModel,
    config: ModelConfig,
) -> StepOutput:
    """One iteration of the slip Kalman filter.

    If the current horizontal velocity estimate is strictly below
    ``config.slip_threshold`` (and the refractory window has elapsed), the
    filter is re-initialized at ``z`` instead of being updated. Otherwise this
    is exactly :func:`kf_step`.
    """
    _check_finite(state, z)
    if should_slip(state, config):
        return StepOutput(
            state=reinitialize(state, z, config),
            predicted_measurement=None,
            innovation=None,
            innovation_cov=None,
            nis=None,
            reset=True,
        )
    return kf_step(state, z, process, meas)
