from __future__ import annotations

import csv

import numpy as np
import pytest

from soundscape.core import ConfigError, PipelineConfig
from soundscape.metrics import (
    CSV_COLUMNS,
    bench_rows,
    bench_tradeoff,
    eval_rows,
    eval_scenario,
    format_report,
    latency_report,
    min_latency_by_window,
    wer,
    write_csv,
)
from soundscape.pipeline import run_stream
from soundscape.scenario import bundled_specs, synthesize


# ── wer ──────────────────────────────────────────────────────────────────────


def test_wer_identical():
    assert wer([1, 2, 3], [1, 2, 3]) == 0.0


def test_wer_single_deletion_over_six():
    # Hand-run DP: deleting 'd' costs 1; 1/6.
    ref = ["a", "b", "c", "d", "e", "f"]
    hyp = ["a", "b", "c", "e", "f"]
    assert wer(ref, hyp) == pytest.approx(1 / 6)


def test_wer_empty_hypothesis_all_deletions():
    assert wer([1, 2, 3], []) == 1.0


def test_wer_empty_reference_rejected():
    with pytest.raises(ValueError, match="empty-reference"):
        wer([], [1])


def test_wer_single_substitution_is_one_over_n():
    rng = np.random.default_rng(40)
    for n in (1, 3, 7, 20):
        ref = [int(t) for t in rng.integers(0, 16, n)]
        hyp = list(ref)
        pos = int(rng.integers(0, n))
        hyp[pos] = (hyp[pos] + 1) % 16
        assert wer(ref, hyp) == pytest.approx(1 / n)


def test_wer_bounds():
    rng = np.random.default_rng(41)
    for _ in range(50):
        ref = [int(t) for t in rng.integers(0, 4, rng.integers(1, 12))]
        hyp = [int(t) for t in rng.integers(0, 4, rng.integers(0, 12))]
        value = wer(ref, hyp)
        assert 0.0 <= value <= max(1.0, len(hyp) / len(ref))
        assert wer(ref, ref) == 0.0


def test_wer_erasures_count_as_substitutions():
    assert wer([1, 2], [-1, 2]) == pytest.approx(0.5)


# ── eval_scenario ────────────────────────────────────────────────────────────


def test_eval_perfect_stems():
    out = synthesize(bundled_specs()["c2_disjoint"])
    report = eval_scenario(out, dict(out.stems))
    for stem in report.stems:
        assert stem.si_sdr_db == 100.0
        assert stem.wer == 0.0


def test_eval_mixture_as_estimate_zero_improvement():
    out = synthesize(bundled_specs()["c2_disjoint"])
    estimates = {sid: out.mixture for sid in out.stems}
    report = eval_scenario(out, estimates)
    for stem in report.stems:
        assert stem.improvement_db == pytest.approx(0.0, abs=1e-9)


def test_eval_unmapped_track_rejected():
    out = synthesize(bundled_specs()["c1_single"])
    with pytest.raises(ValueError, match="unmapped-track"):
        eval_scenario(out, {"ghost": out.mixture})


def test_eval_c5_improvement_over_20db():
    out = synthesize(bundled_specs()["c5_disjoint"])
    run = run_stream(out.mixture, out.annotations, PipelineConfig(2.0, 1.0))
    report = eval_scenario(out, run.estimates, run.residuals)
    assert len(report.stems) == 5
    for stem in report.stems:
        assert stem.improvement_db >= 20.0, stem


def test_eval_noise_source_scored_against_noise_residual():
    from soundscape.scenario import ScenarioSpec, SourceDef

    spec = ScenarioSpec(
        "noisy",
        4.0,
        seed=5,
        sources=(
            SourceDef("spk1", "speaker", (300.0, 852.0), ((0.0, 4.0),), (0.3, 0.5)),
            SourceDef("hum", "noise", (0.0, 250.0), ((0.0, 4.0),), level=0.05),
        ),
    )
    out = synthesize(spec)
    run = run_stream(out.mixture, out.annotations, PipelineConfig(2.0, 1.0))
    report = eval_scenario(out, run.estimates, run.residuals)
    by_source = {s.source: s for s in report.stems}
    assert by_source["hum"].improvement_db > 10.0


# ── bench ────────────────────────────────────────────────────────────────────


@pytest.fixture(scope="module")
def short_scenario():
    from soundscape.scenario import SPEECH_SUBBANDS, ScenarioSpec, SourceDef

    spec = ScenarioSpec(
        "c2_short",
        4.0,
        seed=12,
        sources=(
            SourceDef("spk1", "speaker", SPEECH_SUBBANDS[0], ((0.0, 4.0),), (0.25, 0.5)),
            SourceDef("spk2", "speaker", SPEECH_SUBBANDS[1], ((0.0, 4.0),), (0.75, 0.5)),
        ),
    )
    return synthesize(spec)


def test_bench_window_sweep_constant_latency(short_scenario):
    results = bench_tradeoff(short_scenario, [1, 2, 4], [1.0])
    assert len(results) == 3
    for latency, wer_value in results:
        assert latency.analytic_latency_s == 2.0
        assert latency.measured_latency_s == 2.0
        assert latency.realtime_factor < 1.0
        assert wer_value is not None


def test_bench_chunk_sweep_latency_tracks_chunk(short_scenario):
    results = bench_tradeoff(short_scenario, [4.0], [0.5, 1.0, 2.0])
    latencies = [lat.analytic_latency_s for lat, _ in results]
    assert latencies == [1.0, 2.0, 4.0]


def test_bench_paper_min_latency_row(short_scenario):
    results = bench_tradeoff(short_scenario, [1.0], [0.15])
    (latency, _), = results
    assert latency.chunk_size == 0.15
    assert latency.window_size == pytest.approx(1.05)
    assert latency.analytic_latency_s == pytest.approx(0.30)
    assert latency.measured_latency_s == pytest.approx(0.30)


def test_bench_rejects_empty_lists(short_scenario):
    with pytest.raises(ConfigError):
        bench_tradeoff(short_scenario, [], [1.0])


def test_min_latency_non_increasing_as_window_shrinks(short_scenario):
    results = bench_tradeoff(short_scenario, [1, 2, 4], [0.25, 0.5, 1.0])
    by_window = min_latency_by_window(results)
    windows = sorted(by_window)
    for smaller, larger in zip(windows, windows[1:]):
        assert by_window[smaller] <= by_window[larger]


def test_latency_report_simulated_matches_analytic():
    config = PipelineConfig(window_size=2.0, chunk_size=0.5)
    report = latency_report(config, [0.01, 0.02, 0.015])
    assert report.measured_latency_s == report.analytic_latency_s == 1.0


# ── csv ──────────────────────────────────────────────────────────────────────


def test_csv_column_order_and_rows(short_scenario, tmp_path):
    results = bench_tradeoff(short_scenario, [1, 2], [1.0])
    rows = bench_rows(results, short_scenario.spec.name)
    path = tmp_path / "bench.csv"
    write_csv(rows, path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = list(reader)
    assert header == CSV_COLUMNS
    assert len(body) == 2


def test_eval_rows_include_aggregate(short_scenario):
    run = run_stream(
        short_scenario.mixture, short_scenario.annotations, PipelineConfig(2.0, 1.0)
    )
    report = eval_scenario(short_scenario, run.estimates, run.residuals)
    rows = eval_rows(report)
    assert rows[-1]["stem"] == "aggregate"
    assert len(rows) == len(report.stems) + 1
    assert list(rows[0].keys()) == CSV_COLUMNS


def test_format_report_is_printable(short_scenario):
    run = run_stream(
        short_scenario.mixture, short_scenario.annotations, PipelineConfig(2.0, 1.0)
    )
    report = eval_scenario(short_scenario, run.estimates, run.residuals)
    text = format_report(report)
    assert "spk1" in text
    assert "aggregate wer" in text
