"""Page-level tracking: run the filter, turn resets into line numbers, score them."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from slipkf import _kernel
from slipkf.errors import FilterDivergenceError, InvalidInputError, InvalidStateError
from slipkf.filter import DET_FLOOR, MAX_CONDITION, two_point_init
from slipkf.model import ModelConfig
from slipkf.trace import PageTrace

FILTER_KINDS = ("slip", "regular")


@dataclass(frozen=True)
class LineStat:
    line: int
    dwell_seconds: float
    mean_x_velocity: float
    sample_count: int

    @property
    def seconds_per_line(self) -> Optional[float]:
        """Reading time implied by the mean horizontal velocity (one page-width per line)."""
        if self.mean_x_velocity > 0:
            return 1.0 / self.mean_x_velocity
        return None


@dataclass(frozen=True)
class TrackResult:
    """Per-sample output of :func:`track_page`.

    ``nis_series`` is NaN where no measurement update ran: the two samples
    consumed by initialization and every reset sample.
    """

    trace: PageTrace
    filter_kind: str
    estimates: np.ndarray
    nis_series: np.ndarray
    reset_indices: list[int]
    predicted_lines: np.ndarray
    accuracy: Optional[float] = None
    line_stats: list[LineStat] = field(default_factory=list)

    @property
    def page_id(self) -> str:
        return self.trace.page_id

    @property
    def reset_flags(self) -> np.ndarray:
        flags = np.zeros(len(self.estimates), dtype=bool)
        flags[self.reset_indices] = True
        return flags


def assign_lines(reset_indices: Sequence[int], n_samples: int) -> np.ndarray:
    """Line number per sample: 1 before the first reset, +1 at each reset index."""
    idx = np.asarray(reset_indices, dtype=np.int64).reshape(-1)
    if n_samples < 0:
        raise InvalidInputError("n_samples must be non-negative")
    if len(idx):
        if idx[0] < 0 or idx[-1] >= n_samples:
            raise InvalidInputError(f"reset index out of range for {n_samples} samples")
        if np.any(np.diff(idx) <= 0):
            raise InvalidInputError("reset indices must be strictly increasing")
    steps = np.zeros(n_samples, dtype=np.int64)
    steps[idx] = 1
    return 1 + np.cumsum(steps)


def line_detection_accuracy(predicted, truth) -> float:
    """Fraction of samples whose predicted line equals the true line."""
    predicted = np.asarray(predicted).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if len(predicted) != len(truth):
        raise InvalidInputError(
            f"length mismatch: {len(predicted)} predicted vs {len(truth)} true labels"
        )
    if len(predicted) == 0:
        raise InvalidInputError("cannot score an empty sequence")
    return float(np.mean(predicted == truth))


def line_stats(result: TrackResult, delta_t: float) -> list[LineStat]:
    """Dwell time and mean filtered horizontal velocity for every predicted line."""
    stats = []
    x_dot = result.estimates[:, 1]
    for line in np.unique(result.predicted_lines):
        mask = result.predicted_lines == line
        count = int(mask.sum())
        stats.append(
            LineStat(
                line=int(line),
                dwell_seconds=count * delta_t,
                mean_x_velocity=float(x_dot[mask].mean()),
                sample_count=count,
            )
        )
    return stats


_KERNEL_ERRORS = {
    _kernel.NON_FINITE: (InvalidStateError, "non-finite measurement or covariance"),
    _kernel.NOT_POSITIVE_DEFINITE: (
        FilterDivergenceError,
        "innovation covariance is not positive definite",
    ),
    _kernel.ILL_CONDITIONED: (FilterDivergenceError, "innovation covariance is ill-conditioned"),
}


def run_filter(trace: PageTrace, config: ModelConfig, filter_kind: str = "slip"):
    """Initialize on the first two samples and filter the rest.

    Returns ``(estimates, nis_series, reset_indices)`` aligned with the
    trace's samples.
    """
    if filter_kind not in FILTER_KINDS:
        raise InvalidInputError(f"filter_kind must be one of {FILTER_KINDS}, got {filter_kind!r}")
    n = len(trace)
    if n < 3:
        raise InvalidInputError(f"trace too short: {n} samples, need at least 3")
    trace.check_sampling(config.delta_t)

    try:
        init = two_point_init(trace[0], trace[1], config.delta_t, config.gamma)
    except InvalidStateError as exc:
        raise InvalidStateError(f"sample 0-1: {exc}") from exc
    process = config.process_model()
    meas = config.measurement_model()
    z = np.column_stack([trace.z_x[2:], trace.z_y[2:]])
    est, nis_tail, resets, status, bad = _kernel.run_filter(
        z,
        init.x_hat,
        init.p,
        process.f,
        process.q,
        meas.h,
        meas.r,
        filter_kind == "slip",
        config.slip_threshold,
        config.reinit_x_velocity,
        config.gamma,
        config.refractory_samples,
        MAX_CONDITION,
        DET_FLOOR,
    )
    if status != _kernel.OK:
        cls, message = _KERNEL_ERRORS[status]
        raise cls(f"sample {bad + 2}: {message}")

    estimates = np.empty((n, 4))
    # sample 0 has no filtered estimate; report the initial state moved back one step
    estimates[0] = [trace.z_x[0], init.x_hat[1], trace.z_y[0], init.x_hat[3]]
    estimates[1] = init.x_hat
    estimates[2:] = est
    nis_series = np.concatenate([[np.nan, np.nan], nis_tail])
    reset_indices = [int(i) + 2 for i in np.flatnonzero(resets)]
    return estimates, nis_series, reset_indices


def track_page(trace: PageTrace, config: ModelConfig, filter_kind: str = "slip") -> TrackResult:
    """Track one page and, when labels exist, score line detection."""
    estimates, nis_series, reset_indices = run_filter(trace, config, filter_kind)
    predicted = assign_lines(reset_indices, len(trace))

    accuracy = None
    if trace.labels is not None:
        accuracy = line_detection_accuracy(predicted, trace.labels)
        if predicted.max() != trace.labels.max():
            warnings.warn(
                f"{trace.page_id}: detected {int(predicted.max())} lines, "
                f"labels have {int(trace.labels.max())}",
                stacklevel=2,
            )

    result = TrackResult(
        trace=trace,
        filter_kind=filter_kind,
        estimates=estimates,
        nis_series=nis_series,
        reset_indices=reset_indices,
        predicted_lines=predicted,
        accuracy=accuracy,
    )
    return replace(result, line_stats=line_stats(result, config.delta_t))
