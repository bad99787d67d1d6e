"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the collected lines are
repeated in the terminal summary under "acceptance criteria".
"""

import time
import warnings

import numpy as np
import pytest

from oracles import kf_step_loops, posterior_information_form
from slipkf.cli import main, page_seeds
from slipkf.csvio import parse_gaze_csv, write_gaze_csv
from slipkf.filter import FilterState, kf_step
from slipkf.model import Measurement, ModelConfig, build_measurement_model, build_process_noise_cov
from slipkf.model import ProcessModel, build_transition_matrix
from slipkf.simulate import SimConfig, simulate_linear_gaussian, simulate_reading
from slipkf.trace import PageTrace
from slipkf.tracker import run_filter, track_page

CORPUS_SEED = 0
N_PAGES = 25


@pytest.fixture(scope="module", autouse=True)
def warm_kernel():
    # exclude one-time JIT compilation (or cache load) from the timed sections
    track_quiet(simulate_reading(SimConfig(n_lines=2, seconds_per_line=1.0)), ModelConfig(), "slip")


def corpus(**overrides):
    for seed in page_seeds(CORPUS_SEED, N_PAGES):
        yield simulate_reading(SimConfig(seed=seed, **overrides))


def onsets(trace):
    return np.flatnonzero(np.diff(trace.labels)) + 1


def track_quiet(trace, cfg, kind):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return track_page(trace, cfg, kind)


def random_spd(rng, n, lo, hi):
    basis, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return basis @ np.diag(rng.uniform(lo, hi, size=n)) @ basis.T


def test_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    worst = worst_wls = 0.0
    start = time.perf_counter()
    for _ in range(1000):
        dt = float(rng.uniform(0.005, 0.1))
        process = ProcessModel(
            f=build_transition_matrix(dt),
            q=build_process_noise_cov(dt, *rng.uniform(0.0, 5.0, size=2)),
        )
        meas = build_measurement_model(*rng.uniform(0.005, 0.2, size=2))
        x = rng.uniform(-1.0, 1.0, size=4)
        p = random_spd(rng, 4, 0.05, 2.0)
        z = rng.uniform(-0.5, 1.5, size=2)
        out = kf_step(FilterState(x_hat=x, p=p), Measurement(0.0, *z), process, meas)
        ref = kf_step_loops(x, p.tolist(), z, process.f.tolist(), process.q.tolist(), meas.h.tolist(), meas.r.tolist())
        pairs = [
            (out.state.x_hat, ref["x"]),
            (out.state.p, ref["p"]),
            (out.predicted_measurement, ref["z_pred"]),
            (out.innovation, ref["nu"]),
            (out.innovation_cov, ref["s"]),
            (out.nis, ref["nis"]),
        ]
        worst = max(worst, max(float(np.max(np.abs(np.subtract(a, b)))) for a, b in pairs))
        mean, cov = posterior_information_form(ref["x_pred"], ref["p_pred"], z, meas.h, meas.r)
        worst_wls = max(worst_wls, np.abs(out.state.x_hat - mean).max(), np.abs(out.state.p - cov).max())
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and worst_wls <= 1e-9 and elapsed < 1.0
    report(1, "oracle equivalence", ok, f"max loop err {worst:.1e}, max WLS err {worst_wls:.1e}, {elapsed:.2f}s")
    assert ok


def test_nis_consistency(report):
    start = time.perf_counter()
    cfg = ModelConfig()
    process, meas = cfg.process_model(), cfg.measurement_model()
    trace = simulate_linear_gaussian(SimConfig(seed=7, mode="linear_gaussian"), process, meas, 10_002)
    _, nis_series, _ = run_filter(trace, cfg, "regular")
    mean_nis = float(np.nanmean(nis_series))
    elapsed = time.perf_counter() - start
    ok = 1.85 <= mean_nis <= 2.15 and elapsed < 1.0
    report(2, "NIS chi-square consistency", ok, f"mean NIS {mean_nis:.3f} over 10000 steps, {elapsed:.2f}s")
    assert ok


def test_velocity_spike_detectability(report):
    cfg = ModelConfig()
    start = time.perf_counter()
    latencies, false_dips, n_returns = [], 0, 0
    for trace in corpus():
        result = track_quiet(trace, cfg, "slip")
        x_dot = result.estimates[:, 1]
        mid_line = np.ones(len(trace), dtype=bool)
        for o in onsets(trace):
            below = np.flatnonzero(x_dot[o : o + 16] < cfg.slip_threshold)
            latencies.append(int(below[0]) if len(below) else None)
            mid_line[o : o + 16] = False
        # the trigger is disarmed while the re-initialized velocity settles
        for r in [0] + result.reset_indices:
            mid_line[r : r + cfg.refractory_samples] = False
        false_dips += int(np.count_nonzero(x_dot[mid_line] < cfg.slip_threshold))
        n_returns += len(onsets(trace))
    elapsed = time.perf_counter() - start
    missed = sum(lat is None for lat in latencies)
    worst = max(lat for lat in latencies if lat is not None)
    ok = missed == 0 and false_dips == 0 and elapsed < 5.0
    report(
        3,
        "velocity-spike detectability",
        ok,
        f"{n_returns} returns, max latency {worst} samples, {missed} missed, {false_dips} mid-line dips, {elapsed:.2f}s",
    )
    assert ok


def test_line_count_exactness(report):
    cfg = ModelConfig()
    start = time.perf_counter()
    counts = {}
    for n_lines in (1, 3, 10, 25):
        trace = simulate_reading(SimConfig(n_lines=n_lines, seed=100 + n_lines))
        counts[n_lines] = len(track_quiet(trace, cfg, "slip").reset_indices)
    elapsed = time.perf_counter() - start
    ok = all(counts[n] == n - 1 for n in counts) and elapsed < 5.0
    report(4, "line-count exactness", ok, f"resets per L {counts}, {elapsed:.2f}s")
    assert ok


def test_accuracy_regression(report):
    cfg = ModelConfig()
    start = time.perf_counter()
    acc = np.array([track_quiet(trace, cfg, "slip").accuracy for trace in corpus()])
    elapsed = time.perf_counter() - start
    ok = acc.mean() >= 0.95 and acc.min() >= 0.90 and elapsed < 30.0
    report(5, "accuracy regression", ok, f"mean {acc.mean():.4f}, min {acc.min():.4f} over {len(acc)} pages, {elapsed:.2f}s")
    assert ok


def test_overshoot_elimination(report):
    cfg = ModelConfig()
    sim = SimConfig()
    n_sweep = round(sim.return_duration / sim.delta_t)
    start = time.perf_counter()
    err = {"regular": [], "slip": []}
    for trace in corpus():
        for kind in err:
            x_hat = track_quiet(trace, cfg, kind).estimates[:, 0]
            for o in onsets(trace):
                window = slice(o + n_sweep, o + n_sweep + 20)
                err[kind].append(np.abs(x_hat[window] - trace.truth[window, 0]).mean())
    elapsed = time.perf_counter() - start
    regular, slip = np.mean(err["regular"]), np.mean(err["slip"])
    ratio = regular / slip
    ok = ratio >= 2.0 and elapsed < 10.0
    report(6, "overshoot elimination", ok, f"regular {regular:.4f}, slip {slip:.4f}, ratio {ratio:.2f}, {elapsed:.2f}s")
    assert ok


def test_reading_speed_recovery(report):
    cfg = ModelConfig()
    start = time.perf_counter()
    velocities = []
    for seed in page_seeds(CORPUS_SEED, 10):
        trace = simulate_reading(SimConfig(seed=seed, seconds_per_line=15.0))
        stats = track_quiet(trace, cfg, "slip").line_stats
        velocities.extend(s.mean_x_velocity for s in stats)
    elapsed = time.perf_counter() - start
    estimate = 1.0 / float(np.mean(velocities))
    rel = abs(estimate - 15.0) / 15.0
    ok = rel <= 0.10 and elapsed < 5.0
    report(7, "reading-speed recovery", ok, f"implied {estimate:.2f} s/line vs 15, error {rel:.1%}, {elapsed:.2f}s")
    assert ok


def test_two_point_init_exactness(report):
    start = time.perf_counter()
    cfg = ModelConfig(q_x=0.0, q_y=0.0)
    t = np.arange(2000) * cfg.delta_t
    x, y = 0.05 + 0.07 * t, 0.8 - 0.01 * t
    result = track_page(PageTrace(t=t, z_x=x, z_y=y), cfg, "regular")
    error = max(np.abs(result.estimates[:, 0] - x).max(), np.abs(result.estimates[:, 2] - y).max())
    elapsed = time.perf_counter() - start
    ok = error <= 1e-6 and elapsed < 1.0
    report(8, "two-point initialization exactness", ok, f"max position error {error:.1e}, {elapsed:.2f}s")
    assert ok


def test_determinism_and_io(report, tmp_path, capsys):
    start = time.perf_counter()
    trace = simulate_reading(SimConfig(seed=77))
    write_gaze_csv(trace, tmp_path / "page.csv")
    back = parse_gaze_csv(tmp_path / "page.csv")
    round_trip = max(
        np.abs(back.t - trace.t).max(), np.abs(back.z_x - trace.z_x).max(), np.abs(back.z_y - trace.z_y).max()
    )
    labels_equal = np.array_equal(back.labels, trace.labels)
    for name in ("a", "b"):
        main(["simulate", "--output", str(tmp_path / name), "--seed", "3", "--pages", str(N_PAGES)])
    capsys.readouterr()
    files = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    identical = len(files) == N_PAGES and all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files
    )
    elapsed = time.perf_counter() - start
    ok = round_trip <= 1e-9 and labels_equal and identical and elapsed < 5.0
    report(
        9,
        "determinism and I/O",
        ok,
        f"round-trip err {round_trip:.1e}, {len(files)} corpus files identical: {identical}, {elapsed:.2f}s",
    )
    assert ok
