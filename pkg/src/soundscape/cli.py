"""Operator entry point: synthesize scenarios, run, benchmark, evaluate.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from soundscape.core import GainVector, SoundscapeError, snapped_config
from soundscape.metrics import (
    bench_rows,
    bench_tradeoff,
    eval_rows,
    eval_scenario,
    format_report,
    write_csv,
)
from soundscape.pipeline import run_stream
from soundscape.scenario import (
    bundled_specs,
    load_scenario_dir,
    load_spec,
    synthesize,
    write_scenario_dir,
)
from soundscape.wavio import read_wav, write_wav


def _parse_float_list(text: str, parser: argparse.ArgumentParser, flag: str) -> list[float]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        parser.error(f"{flag}: empty list")
    try:
        return [float(part) for part in items]
    except ValueError:
        parser.error(f"{flag}: expected comma-separated numbers, got {text!r}")


def cmd_synth(args, parser) -> int:
    if args.spec in bundled_specs():
        spec = bundled_specs()[args.spec]
    else:
        spec = load_spec(args.spec)
    if args.seed is not None:
        from dataclasses import replace

        spec = replace(spec, seed=args.seed)
    output = synthesize(spec)
    out_dir = Path(args.out)
    write_scenario_dir(output, out_dir)
    print(f"wrote scenario {spec.name!r}: {len(output.stems)} stems, "
          f"{spec.duration:g} s at {spec.sample_rate} Hz -> {out_dir}")
    return 0


def cmd_run(args, parser) -> int:
    scenario = load_scenario_dir(args.scenario_dir)
    config = snapped_config(
        args.window_size, args.chunk_size,
        sample_rate=scenario.spec.sample_rate, tau=args.tau,
    )
    gains = GainVector()

    server = None
    before = after = None
    if args.serve:
        from soundscape.control import ControlServer

        host, _, port = args.serve.partition(":")
        server = ControlServer(gains, host or "127.0.0.1", int(port or 0))
        server.start()
        print(f"control server on {server.host}:{server.port}")

        def before(k):
            server.drain_pending()

        def after(k, result, scaled, mono_chunk):
            server.publish_chunk((k + 1) * config.chunk_size, result.tracks, scaled)

    try:
        run = run_stream(
            scenario.mixture,
            scenario.annotations,
            config,
            gains=gains,
            noise_seed=args.seed,
            before_chunk=before,
            after_chunk=after,
            pace_s=config.chunk_size if args.realtime else None,
            realtime=args.realtime,
        )
    finally:
        if server is not None:
            server.stop()

    if args.out:
        write_wav(args.out, config.sample_rate, run.stereo)
        print(f"wrote remixed stereo output -> {args.out}")
    if args.stems_out:
        stems_dir = Path(args.stems_out)
        stems_dir.mkdir(parents=True, exist_ok=True)
        for source_id, samples in run.estimates.items():
            write_wav(stems_dir / f"{source_id}.wav", config.sample_rate, samples)
        for label, samples in run.residuals.items():
            write_wav(stems_dir / f"{label}.wav", config.sample_rate, samples)
        print(f"wrote {len(run.estimates) + len(run.residuals)} separated stems -> {stems_dir}")
    mean_inf = sum(run.timings) / len(run.timings) if run.timings else 0.0
    print(
        f"processed {run.n_chunks} chunks "
        f"(window {config.window_size:g} s, chunk {config.chunk_size:g} s, "
        f"mean inference {mean_inf * 1000:.1f} ms)"
    )
    return 0


def cmd_bench(args, parser) -> int:
    windows = _parse_float_list(args.windows, parser, "--windows")
    chunks = _parse_float_list(args.chunks, parser, "--chunks")
    scenario = load_scenario_dir(args.scenario_dir)
    results = bench_tradeoff(scenario, windows, chunks)
    rows = bench_rows(results, scenario.spec.name)
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} bench rows -> {args.out}")
    for latency, wer_value in results:
        wer_s = f"{wer_value:.4f}" if wer_value is not None else "-"
        print(
            f"window {latency.window_size:>6.2f} s  chunk {latency.chunk_size:>5.2f} s  "
            f"inference {latency.inference_mean_s * 1000:>7.1f} ms  "
            f"latency {latency.analytic_latency_s:>5.2f} s  "
            f"rtf {latency.realtime_factor:>6.3f}  wer {wer_s}"
        )
    return 0


def cmd_eval(args, parser) -> int:
    scenario = load_scenario_dir(args.scenario_dir)
    separated = Path(args.separated_dir)
    estimates = {}
    residuals = {}
    from soundscape.pipeline import RESIDUAL_KEYS

    for wav_path in sorted(separated.glob("*.wav")):
        _, samples = read_wav(wav_path)
        if wav_path.stem in RESIDUAL_KEYS:
            residuals[wav_path.stem] = samples
        else:
            estimates[wav_path.stem] = samples
    report = eval_scenario(scenario, estimates, residuals)
    print(format_report(report))
    if args.out:
        write_csv(eval_rows(report), args.out)
        print(f"wrote report csv -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soundscape",
        description="Chunk-streamed source separation and remixing engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic scenario directory")
    p_synth.add_argument("spec", help="scenario spec path or bundled name "
                                      f"({', '.join(sorted(bundled_specs()))})")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.set_defaults(func=cmd_synth)

    p_run = sub.add_parser("run", help="stream a scenario through the pipeline")
    p_run.add_argument("scenario_dir")
    p_run.add_argument("--window-size", type=float, default=60.0)
    p_run.add_argument("--chunk-size", type=float, default=1.0)
    p_run.add_argument("--tau", type=float, default=0.5)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--serve", default=None, metavar="HOST:PORT",
                       help="serve the control protocol while running")
    p_run.add_argument("--realtime", action="store_true",
                       help="pace chunks at real time (default: accelerated)")
    p_run.add_argument("--out", default=None, help="remixed stereo wav path")
    p_run.add_argument("--stems-out", default=None, help="directory for separated stems")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="window/chunk trade-off sweep")
    p_bench.add_argument("scenario_dir")
    p_bench.add_argument("--windows", required=True, help="comma-separated seconds")
    p_bench.add_argument("--chunks", required=True, help="comma-separated seconds")
    p_bench.add_argument("--out", required=True, help="output csv path")
    p_bench.set_defaults(func=cmd_bench)

    p_eval = sub.add_parser("eval", help="score separated stems against ground truth")
    p_eval.add_argument("scenario_dir")
    p_eval.add_argument("separated_dir")
    p_eval.add_argument("--out", default=None, help="optional report csv path")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SOUNDSCAPE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (SoundscapeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
