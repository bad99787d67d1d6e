"""Container for one page of timestamped gaze samples."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from slipkf.errors import InvalidInputError
from slipkf.model import Measurement

SPACING_TOLERANCE = 0.10


def _readonly(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PageTrace:
    """Gaze samples for one page in page units.

    Attributes:
        t: Timestamps in seconds, strictly increasing.
        z_x: Observed horizontal positions (page-widths).
        z_y: Observed vertical positions (page-heights).
        labels: Optional 1-based ground-truth line numbers.
        page_id: Free-form identifier, usually the source file stem.
        truth: Optional noiseless ``(n, 4)`` state trajectory (simulated pages).
    """

    t: np.ndarray
    z_x: np.ndarray
    z_y: np.ndarray
    labels: Optional[np.ndarray] = None
    page_id: str = "page"
    truth: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        t = _readonly(self.t, float).reshape(-1)
        z_x = _readonly(self.z_x, float).reshape(-1)
        z_y = _readonly(self.z_y, float).reshape(-1)
        if not (len(t) == len(z_x) == len(z_y)):
            raise InvalidInputError("t, z_x and z_y must have equal lengths")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            bad = int(np.argmax(np.diff(t) <= 0)) + 1
            raise InvalidInputError(f"timestamps must be strictly increasing (sample {bad})")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "z_x", z_x)
        object.__setattr__(self, "z_y", z_y)
        if self.labels is not None:
            labels = _readonly(self.labels, np.int64).reshape(-1)
            if len(labels) != len(t):
                raise InvalidInputError("labels must have one entry per sample")
            if len(labels) and labels.min() < 1:
                raise InvalidInputError("line labels are 1-based")
            object.__setattr__(self, "labels", labels)
        if self.truth is not None:
            truth = _readonly(self.truth, float)
            if truth.shape != (len(t), 4):
                raise InvalidInputError("truth must have shape (n_samples, 4)")
            object.__setattr__(self, "truth", truth)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[Measurement]:
        for t, zx, zy in zip(self.t, self.z_x, self.z_y):
            yield Measurement(float(t), float(zx), float(zy))

    def __getitem__(self, i: int) -> Measurement:
        return Measurement(float(self.t[i]), float(self.z_x[i]), float(self.z_y[i]))

    @property
    def samples(self) -> list[Measurement]:
        return list(self)

    def check_sampling(self, delta_t: float) -> None:
        """Reject traces whose sample spacing strays more than 10% from ``delta_t``."""
        if len(self.t) < 2:
            return
        gaps = np.diff(self.t)
        bad = np.abs(gaps - delta_t) > SPACING_TOLERANCE * delta_t
        if np.any(bad):
            i = int(np.argmax(bad))
            raise InvalidInputError(
                f"sample spacing {gaps[i]:.6g}s at sample {i + 1} is not within "
                f"{SPACING_TOLERANCE:.0%} of delta_t={delta_t:.6g}s"
            )

    def shifted(self, offset: float) -> PageTrace:
        """Same trace with every timestamp moved by ``offset`` seconds."""
        return PageTrace(
            t=self.t + offset,
            z_x=self.z_x,
            z_y=self.z_y,
            labels=self.labels,
            page_id=self.page_id,
            truth=self.truth,
        )
