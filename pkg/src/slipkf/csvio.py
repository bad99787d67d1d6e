"""Reading and writing gaze logs in the ``t,x,y[,line]`` interchange format.

Coordinates in files are screen pixels. They are mapped to page units through
the text-region rectangle of a :class:`ScreenGeometry`, so that one page-width
is the width of the text block rather than of the whole monitor.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from slipkf.errors import FormatError, InvalidConfigError
from slipkf.trace import PageTrace

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("t", "x", "y")
LABEL_COLUMN = "line"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ScreenGeometry:
    """Monitor size and the rectangle occupied by the text, all in pixels."""

    width: float = 1920.0
    height: float = 1080.0
    text_left: float = 0.0
    text_top: float = 0.0
    text_width: float = 1920.0
    text_height: float = 1080.0

    def __post_init__(self) -> None:
        values = (self.width, self.height, self.text_left, self.text_top, self.text_width, self.text_height)
        if not all(math.isfinite(v) for v in values):
            raise InvalidConfigError("screen geometry must be finite")
        if self.width <= 0 or self.height <= 0:
            raise InvalidConfigError("screen size must be positive")
        if self.text_width <= 0 or self.text_height <= 0:
            raise InvalidConfigError("text region must have positive width and height")
        if (
            self.text_left < 0
            or self.text_top < 0
            or self.text_left + self.text_width > self.width
            or self.text_top + self.text_height > self.height
        ):
            raise InvalidConfigError("text region must lie inside the screen")

    def to_page(self, x_px, y_px):
        x = (np.asarray(x_px, dtype=float) - self.text_left) / self.text_width
        y = (np.asarray(y_px, dtype=float) - self.text_top) / self.text_height
        return x, y

    def to_pixels(self, x, y):
        x_px = np.asarray(x, dtype=float) * self.text_width + self.text_left
        y_px = np.asarray(y, dtype=float) * self.text_height + self.text_top
        return x_px, y_px


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"row {row}: column {column!r} is not a number: {text!r}") from None


def parse_gaze_csv(path: PathLike, screen: Optional[ScreenGeometry] = None) -> PageTrace:
    """Load one page of gaze samples.

    Rows whose ``x`` or ``y`` is not finite (blinks, track loss) are dropped
    and counted in a log warning. An empty file yields an empty trace.

    Raises:
        FormatError: A required column is missing, a value is not numeric,
            or timestamps are not strictly increasing.
    """
    screen = screen or ScreenGeometry()
    path = Path(path)
    t, xs, ys, lines = [], [], [], []
    dropped = 0
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return PageTrace(t=[], z_x=[], z_y=[], page_id=path.stem)
        header = [name.strip() for name in reader.fieldnames]
        reader.fieldnames = header
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise FormatError(f"{path.name}: missing required column(s): {', '.join(missing)}")
        has_labels = LABEL_COLUMN in header

        last_t = -math.inf
        for row_no, row in enumerate(reader, start=2):
            ts = _parse_float(row["t"], row_no, "t")
            x = _parse_float(row["x"], row_no, "x")
            y = _parse_float(row["y"], row_no, "y")
            if not (math.isfinite(x) and math.isfinite(y)):
                dropped += 1
                continue
            if not math.isfinite(ts) or ts <= last_t:
                raise FormatError(f"{path.name}: row {row_no}: timestamps must be strictly increasing")
            last_t = ts
            t.append(ts)
            xs.append(x)
            ys.append(y)
            if has_labels:
                label = row[LABEL_COLUMN]
                try:
                    lines.append(int(label))
                except (TypeError, ValueError):
                    raise FormatError(f"{path.name}: row {row_no}: bad line label {label!r}") from None

    if dropped:
        log.warning("%s: dropped %d row(s) with non-finite coordinates", path.name, dropped)
    z_x, z_y = screen.to_page(xs, ys)
    return PageTrace(
        t=t,
        z_x=z_x,
        z_y=z_y,
        labels=lines if has_labels else None,
        page_id=path.stem,
    )


def write_gaze_csv(trace: PageTrace, path: PathLike, screen: Optional[ScreenGeometry] = None) -> None:
    """Write ``trace`` in the interchange format, coordinates in pixels."""
    screen = screen or ScreenGeometry()
    x_px, y_px = screen.to_pixels(trace.z_x, trace.z_y)
    has_labels = trace.labels is not None
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(REQUIRED_COLUMNS) + ([LABEL_COLUMN] if has_labels else []))
        for i in range(len(trace)):
            row = [repr(float(trace.t[i])), repr(float(x_px[i])), repr(float(y_px[i]))]
            if has_labels:
                row.append(str(int(trace.labels[i])))
            writer.writerow(row)
