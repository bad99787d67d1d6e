"""Command-line interface: ``simulate``, ``track`` and ``evaluate``.

Settings come from an optional flat JSON file (``--config``) whose keys are
the field names of :class:`~slipkf.model.ModelConfig`,
:class:`~slipkf.csvio.ScreenGeometry` (``screen_width``, ``screen_height``,
``text_left``, ``text_top``, ``text_width``, ``text_height``),
:class:`~slipkf.simulate.SimConfig` and :class:`RunConfig`. Command-line
flags override file values.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from slipkf.csvio import ScreenGeometry, parse_gaze_csv, write_gaze_csv
from slipkf.errors import InvalidConfigError, SlipKFError
from slipkf.model import ModelConfig
from slipkf.simulate import SimConfig, simulate_reading
from slipkf.tracker import FILTER_KINDS, TrackResult, track_page

log = logging.getLogger("slipkf")

OUTPUT_FORMATS = ("csv", "json")
SAMPLE_COLUMNS = (
    "t",
    "z_x",
    "z_y",
    "x_hat",
    "x_dot_hat",
    "y_hat",
    "y_dot_hat",
    "nis",
    "reset",
    "predicted_line",
)

_SCREEN_KEYS = {
    "screen_width": "width",
    "screen_height": "height",
    "text_left": "text_left",
    "text_top": "text_top",
    "text_width": "text_width",
    "text_height": "text_height",
}
_RUN_KEYS = {"input", "output", "filter_kind", "output_format", "n_pages"}
_MODEL_KEYS = {f.name for f in dataclasses.fields(ModelConfig)}
_SIM_KEYS = {f.name for f in dataclasses.fields(SimConfig)}


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    screen: ScreenGeometry = field(default_factory=ScreenGeometry)
    sim: SimConfig = field(default_factory=SimConfig)
    input: Optional[str] = None
    output: Optional[str] = None
    filter_kind: str = "slip"
    output_format: str = "csv"
    n_pages: int = 25

    def __post_init__(self) -> None:
        if self.filter_kind not in FILTER_KINDS:
            raise InvalidConfigError(f"filter_kind must be one of {FILTER_KINDS}")
        if self.output_format not in OUTPUT_FORMATS:
            raise InvalidConfigError(f"output_format must be one of {OUTPUT_FORMATS}")
        if self.n_pages < 1:
            raise InvalidConfigError("n_pages must be >= 1")


def build_run_config(values: dict[str, Any]) -> RunConfig:
    """Split a flat key/value mapping into the nested configuration objects."""
    known = _MODEL_KEYS | _SIM_KEYS | set(_SCREEN_KEYS) | _RUN_KEYS
    unknown = sorted(set(values) - known)
    if unknown:
        raise InvalidConfigError(f"unknown configuration key(s): {', '.join(unknown)}")

    model_values = {k: v for k, v in values.items() if k in _MODEL_KEYS}
    if "delta_t" in model_values and not {"q_x", "q_y"} & set(model_values):
        model = ModelConfig.for_sampling_interval(**model_values)
    else:
        model = ModelConfig(**model_values)
    sim_values = {k: v for k, v in values.items() if k in _SIM_KEYS}
    # the simulator shares sampling and noise settings with the filter
    for key in ("delta_t", "sigma_x", "sigma_y"):
        sim_values.setdefault(key, getattr(model, key))
    screen = ScreenGeometry(**{_SCREEN_KEYS[k]: v for k, v in values.items() if k in _SCREEN_KEYS})
    run_values = {k: v for k, v in values.items() if k in _RUN_KEYS}
    return RunConfig(model=model, screen=screen, sim=SimConfig(**sim_values), **run_values)


def load_run_config(path: Optional[str], overrides: dict[str, Any]) -> RunConfig:
    values: dict[str, Any] = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values = json.load(fh)
        if not isinstance(values, dict):
            raise InvalidConfigError(f"{path}: configuration must be a JSON object")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return build_run_config(values)


def _optional_float(value: float) -> Optional[float]:
    return None if value is None or math.isnan(value) else float(value)


def summary_record(result: TrackResult) -> dict[str, Any]:
    return {
        "page_id": result.page_id,
        "filter": result.filter_kind,
        "n_samples": len(result.estimates),
        "accuracy": result.accuracy,
        "n_resets": len(result.reset_indices),
        "reset_indices": list(result.reset_indices),
        "line_stats": [
            {
                "line": s.line,
                "dwell_seconds": s.dwell_seconds,
                "mean_x_velocity": s.mean_x_velocity,
                "sample_count": s.sample_count,
                "seconds_per_line": s.seconds_per_line,
            }
            for s in result.line_stats
        ],
    }


def sample_records(result: TrackResult) -> list[dict[str, Any]]:
    trace = result.trace
    flags = result.reset_flags
    rows = []
    for i in range(len(trace)):
        est = result.estimates[i]
        row = {
            "t": float(trace.t[i]),
            "z_x": float(trace.z_x[i]),
            "z_y": float(trace.z_y[i]),
            "x_hat": float(est[0]),
            "x_dot_hat": float(est[1]),
            "y_hat": float(est[2]),
            "y_dot_hat": float(est[3]),
            "nis": _optional_float(result.nis_series[i]),
            "reset": int(flags[i]),
            "predicted_line": int(result.predicted_lines[i]),
        }
        if trace.labels is not None:
            row["truth_line"] = int(trace.labels[i])
        rows.append(row)
    return rows


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(row.get(c)) for c in columns])


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def cmd_track(config: RunConfig) -> int:
    """Track one gaze log and write per-sample estimates plus a summary."""
    if not config.input:
        raise InvalidConfigError("track needs --input")
    trace = parse_gaze_csv(config.input, config.screen)
    result = track_page(trace, config.model, config.filter_kind)
    summary = summary_record(result)

    if config.output:
        out = Path(config.output)
        rows = sample_records(result)
        if config.output_format == "json":
            _write_json(out, {"summary": summary, "samples": rows})
        else:
            columns = list(SAMPLE_COLUMNS) + (["truth_line"] if trace.labels is not None else [])
            _write_csv(out, columns, rows)
            _write_json(out.with_suffix(".summary.json"), summary)
    print(json.dumps({k: summary[k] for k in ("page_id", "filter", "accuracy", "n_resets")}))
    return 0


def page_seeds(master_seed: int, n_pages: int) -> list[int]:
    """Distinct, reproducible per-page seeds derived from one master seed."""
    state = np.random.SeedSequence(master_seed).generate_state(n_pages, dtype=np.uint32)
    return [int(s) for s in state]


def cmd_simulate(config: RunConfig) -> int:
    """Write ``n_pages`` labeled synthetic pages to the output directory."""
    if not config.output:
        raise InvalidConfigError("simulate needs --output (a directory)")
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    width = len(str(config.n_pages))
    for i, seed in enumerate(page_seeds(config.sim.seed, config.n_pages), start=1):
        trace = simulate_reading(dataclasses.replace(config.sim, seed=seed))
        write_gaze_csv(trace, out / f"page_{i:0{width}d}.csv", config.screen)
    print(f"wrote {config.n_pages} page(s) to {out}")
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    """Track every CSV in a corpus directory and tabulate line-detection accuracy.

    Also writes per-page velocity and NIS series of both filters under
    ``<output>/series/`` for plotting.
    """
    if not config.input:
        raise InvalidConfigError("evaluate needs --input (a directory)")
    corpus = Path(config.input)
    files = sorted(corpus.glob("*.csv"))
    if not files:
        raise InvalidConfigError(f"no .csv files in {corpus}")
    out = Path(config.output) if config.output else None
    if out:
        (out / "series").mkdir(parents=True, exist_ok=True)

    rows, failures = [], []
    for path in files:
        try:
            trace = parse_gaze_csv(path, config.screen)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                results = {kind: track_page(trace, config.model, kind) for kind in FILTER_KINDS}
        except (SlipKFError, OSError, UnicodeDecodeError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            failures.append({"page_id": path.stem, "error": str(exc)})
            continue
        result = results[config.filter_kind]
        rows.append(
            {
                "page_id": trace.page_id,
                "n_samples": len(trace),
                "n_lines_true": int(trace.labels.max()) if trace.labels is not None else None,
                "n_lines_detected": int(result.predicted_lines.max()),
                "n_resets": len(result.reset_indices),
                "accuracy": result.accuracy,
            }
        )
        if out:
            series = [
                {
                    "t": float(trace.t[i]),
                    "x_dot_regular": float(results["regular"].estimates[i, 1]),
                    "nis_regular": _optional_float(results["regular"].nis_series[i]),
                    "x_dot_slip": float(results["slip"].estimates[i, 1]),
                    "nis_slip": _optional_float(results["slip"].nis_series[i]),
                }
                for i in range(len(trace))
            ]
            _write_csv(out / "series" / f"{trace.page_id}.csv", list(series[0]), series)

    if not rows:
        print("error: no page could be evaluated", file=sys.stderr)
        return 1
    scored = [r["accuracy"] for r in rows if r["accuracy"] is not None]
    mean = float(np.mean(scored)) if scored else None
    summary = {
        "filter": config.filter_kind,
        "n_pages": len(rows),
        "mean_accuracy": mean,
        "min_accuracy": float(np.min(scored)) if scored else None,
        "failures": failures,
    }
    if out:
        if config.output_format == "json":
            _write_json(out / "accuracy.json", {"summary": summary, "pages": rows})
        else:
            _write_csv(out / "accuracy.csv", list(rows[0]), rows)
            _write_json(out / "summary.json", summary)
    for row in rows:
        acc = "n/a" if row["accuracy"] is None else f"{row['accuracy']:.4f}"
        print(f"{row['page_id']}\t{acc}\t{row['n_resets']} resets")
    print("mean accuracy: " + ("n/a" if mean is None else f"{mean:.4f}"))
    return 0


COMMANDS = {"simulate": cmd_simulate, "track": cmd_track, "evaluate": cmd_evaluate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slipkf", description="Track reading progression in eye-gaze logs with a slip Kalman filter."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        p.add_argument("--config", help="flat JSON configuration file")
        p.add_argument("--input", help="input CSV file (track) or corpus directory (evaluate)")
        p.add_argument("--output", help="output file (track) or directory (simulate, evaluate)")
        p.add_argument("--filter", dest="filter_kind", choices=FILTER_KINDS)
        p.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS)
        p.add_argument("--seed", type=int, help="master seed (simulate)")
        if name == "simulate":
            p.add_argument("--pages", dest="n_pages", type=int, help="number of pages")
            p.add_argument("--lines", dest="n_lines", type=int, help="lines per page")
            p.add_argument("--seconds-per-line", dest="seconds_per_line", type=float)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    overrides = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "config", "verbose")
    }
    try:
        config = load_run_config(args.config, overrides)
        return COMMANDS[args.command](config)
    except (SlipKFError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
