"""Synthetic reading-gaze traces with ground-truth line labels.

Two generators are provided. :func:`simulate_reading` produces pages that look
like reading: piecewise-constant fixations marching left to right across each
line, followed by a fast right-to-left line return. :func:`simulate_linear_gaussian`
draws data exactly from the filter's own linear-Gaussian model and exists to
check filter consistency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from slipkf.errors import InvalidConfigError
from slipkf.model import DEFAULT_DELTA_T, MeasurementModel, ProcessModel
from slipkf.trace import PageTrace

MODES = ("reading", "linear_gaussian")

# Fixation durations are drawn from a gamma distribution with this shape;
# shape 6 gives a coefficient of variation near 0.4, typical of reading.
_FIXATION_SHAPE = 6.0
_MIN_LINE_SCALE = 0.25
# First and last fixation targets of every line.
_LEFT_MARGIN = 0.05
_RIGHT_MARGIN = 0.95


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a simulated page. Lengths are in page units."""

    n_lines: int = 25
    seconds_per_line: float = 10.0
    line_time_jitter: float = 0.1
    saccades_per_line: float = 10.0
    fixation_noise: float = 0.01
    sigma_x: float = 0.01
    sigma_y: float = 0.005
    delta_t: float = DEFAULT_DELTA_T
    return_duration: float = 0.15
    seed: int = 0
    mode: str = "reading"

    def __post_init__(self) -> None:
        def check(ok: bool, message: str) -> None:
            if not ok:
                raise InvalidConfigError(message)

        check(int(self.n_lines) == self.n_lines and self.n_lines >= 1, "n_lines must be an integer >= 1")
        for name in ("seconds_per_line", "saccades_per_line", "delta_t", "return_duration"):
            value = getattr(self, name)
            check(math.isfinite(value) and value > 0, f"{name} must be > 0, got {value!r}")
        for name in ("line_time_jitter", "fixation_noise", "sigma_x", "sigma_y"):
            value = getattr(self, name)
            check(math.isfinite(value) and value >= 0, f"{name} must be >= 0, got {value!r}")
        check(self.return_duration >= self.delta_t, "return_duration must be >= delta_t")
        check(self.mode in MODES, f"mode must be one of {MODES}, got {self.mode!r}")


def _line_fixations(rng: np.random.Generator, config: SimConfig):
    """Fixation positions (sorted) and per-fixation sample counts for one line."""
    scale = max(_MIN_LINE_SCALE, 1.0 + config.line_time_jitter * rng.standard_normal())
    n_samples = max(1, round(config.seconds_per_line * scale / config.delta_t))
    n_fix = max(2, int(rng.poisson(config.saccades_per_line)))
    slots = _LEFT_MARGIN + (_RIGHT_MARGIN - _LEFT_MARGIN) * np.arange(n_fix) / (n_fix - 1)
    positions = np.sort(slots + config.fixation_noise * rng.standard_normal(n_fix))
    weights = rng.gamma(_FIXATION_SHAPE, size=n_fix)
    bounds = np.rint(np.cumsum(weights) / weights.sum() * n_samples).astype(int)
    counts = np.diff(np.concatenate(([0], bounds)))
    return positions, counts


def simulate_reading(config: SimConfig) -> PageTrace:
    """Simulate one page read line by line from top to bottom.

    Line ``l`` sits at ordinate ``(l - 0.5) / n_lines``. Within a line the
    gaze holds at each fixation and jumps forward between fixations. A line
    return sweeps ``x`` linearly back to the next line's first fixation over
    ``return_duration`` while ``y`` steps down one line pitch; the sweep
    samples carry the label of the line being moved to.
    """
    rng = np.random.default_rng(config.seed)
    dt = config.delta_t
    n_sweep = max(1, round(config.return_duration / dt))
    pitch = 1.0 / config.n_lines

    xs, vxs, ys, vys, labels = [], [], [], [], []
    prev_end: Optional[float] = None
    for line in range(1, config.n_lines + 1):
        y_line = (line - 0.5) * pitch
        positions, counts = _line_fixations(rng, config)
        if prev_end is not None:
            frac = np.arange(1, n_sweep + 1) / n_sweep
            xs.append(prev_end + (positions[0] - prev_end) * frac)
            vxs.append(np.full(n_sweep, (positions[0] - prev_end) / (n_sweep * dt)))
            ys.append(y_line - pitch + pitch * frac)
            vys.append(np.full(n_sweep, pitch / (n_sweep * dt)))
            labels.append(np.full(n_sweep, line))
        n = int(counts.sum())
        xs.append(np.repeat(positions, counts))
        vxs.append(np.zeros(n))
        ys.append(np.full(n, y_line))
        vys.append(np.zeros(n))
        labels.append(np.full(n, line))
        prev_end = float(positions[-1])

    x = np.concatenate(xs)
    y = np.concatenate(ys)
    n = len(x)
    truth = np.column_stack([x, np.concatenate(vxs), y, np.concatenate(vys)])
    z_x = x + config.sigma_x * rng.standard_normal(n)
    z_y = y + config.sigma_y * rng.standard_normal(n)
    return PageTrace(
        t=np.arange(n) * dt,
        z_x=z_x,
        z_y=z_y,
        labels=np.concatenate(labels),
        page_id=f"sim-{config.seed}",
        truth=truth,
    )


def _covariance_factor(cov: np.ndarray) -> np.ndarray:
    """A matrix ``L`` with ``L @ L.T == cov`` for a PSD ``cov``."""
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def simulate_linear_gaussian(
    config: SimConfig,
    model: ProcessModel,
    meas: MeasurementModel,
    n: int,
    x0=None,
) -> PageTrace:
    """Draw ``n`` samples exactly from the linear-Gaussian state-space model.

    ``x(k+1) = F x(k) + w``, ``w ~ N(0, Q)`` and ``z(k) = H x(k) + v``,
    ``v ~ N(0, R)``. The initial state defaults to a gaze at the left of
    mid-page moving at a typical reading rate.
    """
    if n < 1:
        raise InvalidConfigError("n must be >= 1")
    rng = np.random.default_rng(config.seed)
    if x0 is None:
        x0 = [0.05, 0.2 / 3, 0.5, 0.0]
    state = np.asarray(x0, dtype=float).reshape(4)
    q_factor = _covariance_factor(model.q)
    r_factor = _covariance_factor(meas.r)

    process_noise = rng.standard_normal((n, 4)) @ q_factor.T
    meas_noise = rng.standard_normal((n, 2)) @ r_factor.T
    truth = np.empty((n, 4))
    for k in range(n):
        if k:
            state = model.f @ state + process_noise[k]
        truth[k] = state
    z = truth @ meas.h.T + meas_noise
    return PageTrace(
        t=np.arange(n) * config.delta_t,
        z_x=z[:, 0],
        z_y=z[:, 1],
        labels=None,
        page_id=f"lg-{config.seed}",
        truth=truth,
    )
