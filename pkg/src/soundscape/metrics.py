"""Evaluation harness: WER, SI-SDR reporting, and the window/chunk trade-off bench."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from soundscape.core import ConfigError, PipelineConfig, SPEAKER_KIND, snapped_config
from soundscape.dsp import si_sdr
from soundscape.pipeline import end_to_end_latency, run_stream, simulate_emit_latencies
from soundscape.scenario import ScenarioOutput, decode_tokens

CSV_COLUMNS = [
    "scenario",
    "window_s",
    "chunk_s",
    "stem",
    "si_sdr_db",
    "improvement_db",
    "wer",
    "inference_mean_s",
    "inference_p95_s",
    "analytic_latency_s",
    "measured_latency_s",
]


def wer(reference: list, hypothesis: list) -> float:
    """(substitutions + deletions + insertions) / len(reference), unit costs."""
    if not reference:
        raise ValueError("empty-reference")
    prev = list(range(len(hypothesis) + 1))
    for i, ref_tok in enumerate(reference, 1):
        cur = [i]
        for j, hyp_tok in enumerate(hypothesis, 1):
            cost = 0 if ref_tok == hyp_tok else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1] / len(reference)


@dataclass(frozen=True)
class StemEval:
    source: str
    si_sdr_db: float
    improvement_db: float
    wer: float | None = None  # speakers only
    raw_wer: float | None = None  # decoding the raw mixture instead


@dataclass
class EvalReport:
    scenario: str
    config: PipelineConfig | None
    stems: list[StemEval]

    @property
    def mean_improvement_db(self) -> float:
        return float(np.mean([s.improvement_db for s in self.stems]))

    @property
    def std_improvement_db(self) -> float:
        return float(np.std([s.improvement_db for s in self.stems]))

    @property
    def aggregate_wer(self) -> float | None:
        vals = [s.wer for s in self.stems if s.wer is not None]
        return float(np.mean(vals)) if vals else None

    @property
    def aggregate_raw_wer(self) -> float | None:
        vals = [s.raw_wer for s in self.stems if s.raw_wer is not None]
        return float(np.mean(vals)) if vals else None


@dataclass(frozen=True)
class LatencyReport:
    window_size: float  # effective (chunk-multiple) window
    chunk_size: float
    inference_mean_s: float
    inference_p95_s: float
    analytic_latency_s: float
    measured_latency_s: float
    requested_window_size: float | None = None

    @property
    def realtime_factor(self) -> float:
        return self.inference_mean_s / self.chunk_size


def eval_scenario(
    scenario: ScenarioOutput,
    estimates: dict[str, np.ndarray],
    residuals: dict[str, np.ndarray] | None = None,
) -> EvalReport:
    """Score separated estimates against exact ground truth.

    Estimates are keyed by ground-truth source id (the track-to-source mapping
    comes from annotation provenance); noise sources are scored against the
    coarse noise residual. WER is computed only over speaker stems, against
    the raw mixture as the lower baseline.
    """
    spec = scenario.spec
    known = {src.id for src in spec.sources}
    unmapped = set(estimates) - known
    if unmapped:
        raise ValueError(f"unmapped-track: {sorted(unmapped)}")

    sr = spec.sample_rate
    rows = []
    for src in spec.sources:
        reference = scenario.stems[src.id]
        if src.kind == "noise":
            estimate = (residuals or {}).get("noise")
        else:
            estimate = estimates.get(src.id)
        if estimate is None:
            continue
        n = min(len(reference), len(estimate))
        score = si_sdr(reference[:n], estimate[:n])
        baseline = si_sdr(reference[:n], scenario.mixture[:n])
        row_wer = raw_wer = None
        if src.kind == SPEAKER_KIND:
            ref_tokens = scenario.transcripts[src.id]
            hyp = decode_tokens(estimate, src.band, sr, src.schedule)
            raw = decode_tokens(scenario.mixture, src.band, sr, src.schedule)
            row_wer = wer(ref_tokens, hyp)
            raw_wer = wer(ref_tokens, raw)
        rows.append(StemEval(src.id, score, score - baseline, row_wer, raw_wer))
    return EvalReport(spec.name, None, rows)


def latency_report(
    config: PipelineConfig, timings: list[float], requested_window: float | None = None
) -> LatencyReport:
    mean_inf = float(np.mean(timings)) if timings else 0.0
    p95_inf = float(np.percentile(timings, 95)) if timings else 0.0
    analytic = end_to_end_latency(config, mean_inf)
    simulated = simulate_emit_latencies(config, timings)
    measured = max(simulated) if simulated else analytic
    return LatencyReport(
        window_size=config.window_size,
        chunk_size=config.chunk_size,
        inference_mean_s=mean_inf,
        inference_p95_s=p95_inf,
        analytic_latency_s=analytic,
        measured_latency_s=measured,
        requested_window_size=requested_window,
    )


def bench_tradeoff(
    scenario: ScenarioOutput,
    window_sizes: list[float],
    chunk_sizes: list[float],
    sample_rate: int | None = None,
) -> list[tuple[LatencyReport, float | None]]:
    """Run the full pipeline per (window, chunk) pair; report latency and WER.

    Windows are snapped to the nearest chunk multiple so sweeps like
    window=1 s at chunk=0.15 s stay runnable.
    """
    if not window_sizes or not chunk_sizes:
        raise ConfigError("window_sizes and chunk_sizes must be non-empty")
    sr = sample_rate or scenario.spec.sample_rate
    rows = []
    for window in window_sizes:
        for chunk in chunk_sizes:
            config = snapped_config(window, chunk, sample_rate=sr)
            run = run_stream(scenario.mixture, scenario.annotations, config)
            report = eval_scenario(scenario, run.estimates, run.residuals)
            rows.append(
                (latency_report(config, run.timings, requested_window=window),
                 report.aggregate_wer)
            )
    return rows


def eval_rows(
    report: EvalReport, latency: LatencyReport | None = None, scenario: str | None = None
) -> list[dict]:
    """Per-stem CSV rows in the fixed column order."""

    def base() -> dict:
        row = dict.fromkeys(CSV_COLUMNS, "")
        row["scenario"] = scenario or report.scenario
        if latency is not None:
            row.update(
                window_s=latency.window_size,
                chunk_s=latency.chunk_size,
                inference_mean_s=round(latency.inference_mean_s, 6),
                inference_p95_s=round(latency.inference_p95_s, 6),
                analytic_latency_s=latency.analytic_latency_s,
                measured_latency_s=latency.measured_latency_s,
            )
        return row

    rows = []
    for stem in report.stems:
        row = base()
        row.update(
            stem=stem.source,
            si_sdr_db=round(stem.si_sdr_db, 3),
            improvement_db=round(stem.improvement_db, 3),
            wer="" if stem.wer is None else round(stem.wer, 4),
        )
        rows.append(row)
    agg = base()
    agg.update(
        stem="aggregate",
        si_sdr_db=round(float(np.mean([s.si_sdr_db for s in report.stems])), 3)
        if report.stems
        else "",
        improvement_db=round(report.mean_improvement_db, 3) if report.stems else "",
        wer="" if report.aggregate_wer is None else round(report.aggregate_wer, 4),
    )
    rows.append(agg)
    return rows


def bench_rows(
    results: list[tuple[LatencyReport, float | None]], scenario: str
) -> list[dict]:
    rows = []
    for latency, aggregate_wer in results:
        row = dict.fromkeys(CSV_COLUMNS, "")
        row.update(
            scenario=scenario,
            window_s=round(latency.window_size, 6),
            chunk_s=latency.chunk_size,
            stem="aggregate",
            wer="" if aggregate_wer is None else round(aggregate_wer, 4),
            inference_mean_s=round(latency.inference_mean_s, 6),
            inference_p95_s=round(latency.inference_p95_s, 6),
            analytic_latency_s=latency.analytic_latency_s,
            measured_latency_s=latency.measured_latency_s,
        )
        rows.append(row)
    return rows


def write_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def format_report(report: EvalReport) -> str:
    """Human-readable evaluation table."""
    lines = [f"scenario: {report.scenario}"]
    header = f"{'stem':<12} {'si_sdr_db':>10} {'improve_db':>11} {'wer':>8} {'raw_wer':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for stem in report.stems:
        wer_s = f"{stem.wer:.4f}" if stem.wer is not None else "-"
        raw_s = f"{stem.raw_wer:.4f}" if stem.raw_wer is not None else "-"
        lines.append(
            f"{stem.source:<12} {stem.si_sdr_db:>10.2f} {stem.improvement_db:>11.2f} "
            f"{wer_s:>8} {raw_s:>8}"
        )
    lines.append(
        f"mean improvement: {report.mean_improvement_db:.2f} dB "
        f"(+/- {report.std_improvement_db:.2f})"
    )
    if report.aggregate_wer is not None:
        lines.append(
            f"aggregate wer: {report.aggregate_wer:.4f} "
            f"(raw mixture: {report.aggregate_raw_wer:.4f})"
        )
    return "\n".join(lines)


def min_latency_by_window(
    results: list[tuple[LatencyReport, float | None]]
) -> dict[float, float]:
    """Minimum achievable analytic latency per requested window among
    realtime-capable rows (grouping by the requested size keeps one key per
    sweep point even when snapping shifts the effective window per chunk)."""
    out: dict[float, float] = {}
    for latency, _ in results:
        if latency.realtime_factor >= 1.0:
            continue
        w = latency.requested_window_size
        if w is None:
            w = latency.window_size
        if w not in out or latency.analytic_latency_s < out[w]:
            out[w] = latency.analytic_latency_s
    return out
