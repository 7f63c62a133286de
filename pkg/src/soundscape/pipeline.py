"""Streaming scheduler: ingest chunks, run the separation cascade, track latency.

Each chunk period the pipeline appends the chunk to the rolling window, runs
associate -> activate -> coarse separation on the full window -> speech/music
refinement, and keeps only the final chunk of every stem for remixing. The
latency model is analytic (two chunk periods when inference fits in one) and
the simulated-clock scheduler must reproduce it exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from soundscape.core import (
    INSTRUMENT_CLASSES,
    SPEAKER_KIND,
    AudioChunk,
    GainVector,
    PipelineConfig,
    RollingWindow,
    SourceTrack,
    Stem,
    StreamError,
    validate_config,
)
from soundscape.detection import Detection, TrackAssociator, activate
from soundscape.dsp import (
    BandProfile,
    coarse_separate,
    default_coarse_profile,
    default_instrument_profile,
    refine_music,
    refine_speech,
)

RESIDUAL_KEYS = ("residual-speech", "other-music", "noise")


@dataclass
class StepResult:
    """Separated chunk-length stems plus bookkeeping for one inference cycle."""

    stems: dict[str, Stem]
    tracks: list[SourceTrack]
    active_instruments: set[str]
    inference_s: float
    stale: bool
    coords: dict[str, tuple[float, float]] = field(default_factory=dict)


def end_to_end_latency(config: PipelineConfig, inference_time: float) -> float:
    """Analytic capture-to-playback latency for the three-stage pipeline.

    Two chunk periods when inference fits in one period (pipelined stages);
    otherwise the inference stage slips by whole periods.
    """
    if inference_time < 0:
        raise ValueError("inference_time must be >= 0")
    c = config.chunk_size
    if inference_time <= c:
        return 2.0 * c
    return c + math.ceil(inference_time / c) * c


def simulate_emit_latencies(config: PipelineConfig, inference_times: list[float]) -> list[float]:
    """Per-chunk latency from a simulated clock driving the three stages.

    Stages hand off only at chunk-period boundaries: capture of chunk k ends
    at (k+1)*c, inference occupies the next ceil(t/c) periods, playback starts
    at the following boundary. Overload never backlogs the queue (the
    backpressure policy replays masks instead of queueing), so each chunk's
    emission depends only on its own inference time.
    """
    return [end_to_end_latency(config, t) for t in inference_times]


class StreamingPipeline:
    """Owns the rolling window, track state, and the separation cascade."""

    def __init__(
        self,
        config: PipelineConfig,
        coarse_profile: BandProfile | None = None,
        instrument_profile: BandProfile | None = None,
        gains: GainVector | None = None,
    ):
        validate_config(config)
        self.config = config
        self.coarse_profile = coarse_profile or default_coarse_profile(config.sample_rate)
        self.instrument_profile = instrument_profile or default_instrument_profile(
            config.sample_rate
        )
        self.gains = gains if gains is not None else GainVector()
        self.window = RollingWindow(config.window_size)
        self.associator = TrackAssociator(grace_period=2.0 * config.window_size)
        self.timings: list[float] = []
        self._n_pushed = 0
        self._last_inference = 0.0
        self._cached_plan: tuple[set[str], list[SourceTrack]] | None = None

    @property
    def clock(self) -> float:
        return self._n_pushed * self.config.chunk_size

    @property
    def tracks(self) -> list[SourceTrack]:
        return self.associator.tracks

    def push_chunk(self, chunk: AudioChunk) -> None:
        if chunk.seq_index != self._n_pushed:
            raise StreamError(
                f"out-of-order-chunk: got seq {chunk.seq_index}, expected {self._n_pushed}"
            )
        if chunk.n_samples != self.config.chunk_samples:
            raise StreamError(
                f"length-mismatch: chunk has {chunk.n_samples} samples, "
                f"config expects {self.config.chunk_samples}"
            )
        if chunk.sample_rate != self.config.sample_rate:
            raise StreamError("length-mismatch: chunk sample_rate differs from config")
        self.window = self.window.append(chunk)
        self._n_pushed += 1

    def step(self, detections: list[Detection], realtime: bool = False) -> StepResult:
        """Run one inference cycle over the current window.

        In realtime mode, if the previous cycle overran one chunk period the
        cached activation plan is replayed (no re-association) and the output
        is flagged stale.
        """
        if len(self.window) == 0:
            raise StreamError("empty-window")
        t0 = time.perf_counter()

        stale = (
            realtime
            and self._cached_plan is not None
            and self._last_inference > self.config.chunk_size
        )
        if stale:
            active, anchors = self._cached_plan
        else:
            now = self.clock
            self.associator.associate(detections, now)
            active = activate(detections, self.config.tau) & set(INSTRUMENT_CLASSES)
            anchors = [
                t
                for t in self.tracks
                if t.kind == SPEAKER_KIND and t.active and t.band is not None
            ]
            self._cached_plan = (active, list(anchors))

        stems = self._separate(active, anchors)

        inference = time.perf_counter() - t0
        self.timings.append(inference)
        self._last_inference = inference
        coords = {t.id: t.coords for t in self.tracks}
        return StepResult(
            stems=stems,
            tracks=list(self.tracks),
            active_instruments=active,
            inference_s=inference,
            stale=stale,
            coords=coords,
        )

    def _separate(self, active: set[str], anchors: list[SourceTrack]) -> dict[str, Stem]:
        cfg = self.config
        samples = self.window.samples()
        speech, music, noise = coarse_separate(
            samples, self.coarse_profile, cfg.stft_frame, cfg.stft_hop
        )

        profile = self._effective_instrument_profile(active)
        speech_stems = refine_speech(
            speech, anchors, cfg.sample_rate, cfg.stft_frame, cfg.stft_hop
        )
        music_stems = refine_music(music, active, profile, cfg.stft_frame, cfg.stft_hop)

        tail = cfg.chunk_samples
        out: dict[str, Stem] = {}
        class_to_track = self._instrument_track_ids()
        for stem in speech_stems + music_stems + [noise]:
            trimmed = stem.samples[-tail:]
            if stem.track_id is not None:
                out[stem.track_id] = Stem(stem.label, trimmed, stem.track_id)
            elif stem.label.startswith("instrument:"):
                cls = stem.label.split(":", 1)[1]
                track_id = class_to_track.get(cls)
                key = track_id if track_id is not None else stem.label
                out[key] = Stem(stem.label, trimmed, track_id)
            else:
                out[stem.label] = Stem(stem.label, trimmed)
        return out

    def _effective_instrument_profile(self, active: set[str]) -> BandProfile:
        bands = dict(self.instrument_profile.bands)
        for track in self.tracks:
            if track.kind in INSTRUMENT_CLASSES and track.band is not None:
                bands[track.kind] = [track.band]
        return BandProfile(bands, self.config.sample_rate)

    def _instrument_track_ids(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for track in self.tracks:
            if track.kind in INSTRUMENT_CLASSES and track.kind not in out:
                out[track.kind] = track.id
        return out

    def provenance(self) -> dict[str, str]:
        return self.associator.provenance()


@dataclass
class RunResult:
    """Everything an offline streaming run produced, aligned to stream time."""

    config: PipelineConfig
    mono: np.ndarray
    stereo: np.ndarray
    estimates: dict[str, np.ndarray]  # ground-truth source id -> separated signal
    residuals: dict[str, np.ndarray]
    timings: list[float]
    provenance: dict[str, str]
    n_chunks: int
    stale_chunks: int = 0


def run_stream(
    mixture: np.ndarray,
    annotations,
    config: PipelineConfig,
    gains: GainVector | None = None,
    noise_seed: int | None = None,
    before_chunk=None,
    after_chunk=None,
    pace_s: float | None = None,
    realtime: bool = False,
) -> RunResult:
    """Drive the pipeline over a full mixture in accelerated (or paced) time.

    `before_chunk(k)` runs at each chunk boundary before the gain snapshot is
    taken (the control server drains pending gain updates there);
    `after_chunk(k, result, scaled, mono_chunk)` runs after remixing.
    """
    from soundscape.detection import detect
    from soundscape.remixer import apply_gains, mix_scaled, pan_scaled

    pipeline = StreamingPipeline(config, gains=gains)
    cs = config.chunk_samples
    mixture = np.asarray(mixture, dtype=np.float64)
    n_input = len(mixture)
    n_chunks = math.ceil(n_input / cs)
    padded = np.pad(mixture, (0, n_chunks * cs - n_input))

    total = n_chunks * cs
    mono = np.zeros(total)
    stereo = np.zeros((2, total))
    tracked: dict[str, np.ndarray] = {}
    residuals: dict[str, np.ndarray] = {}
    # Gains preset before the stream starts apply from sample 0, no ramp.
    prev_snapshot: dict[str, float] = pipeline.gains.snapshot()
    stale_chunks = 0

    for k in range(n_chunks):
        if before_chunk is not None:
            before_chunk(k)
        chunk = AudioChunk(config.sample_rate, padded[k * cs : (k + 1) * cs], k, config.chunk_size)
        pipeline.push_chunk(chunk)
        t_mid = (k + 0.5) * config.chunk_size
        detections = detect(annotations, t_mid, noise_seed)
        result = pipeline.step(detections, realtime=realtime)
        stale_chunks += int(result.stale)

        snapshot = pipeline.gains.snapshot()
        scaled = apply_gains(result.stems, snapshot, prev_snapshot, config.sample_rate)
        mono_chunk = mix_scaled(scaled)
        sl = slice(k * cs, (k + 1) * cs)
        mono[sl] = mono_chunk
        stereo[:, sl] = pan_scaled(scaled, result.coords)
        prev_snapshot = snapshot

        for key, stem in result.stems.items():
            target = residuals if key in RESIDUAL_KEYS else tracked
            if key not in target:
                target[key] = np.zeros(total)
            target[key][sl] = stem.samples

        if after_chunk is not None:
            after_chunk(k, result, scaled, mono_chunk)
        if pace_s is not None:
            time.sleep(pace_s)

    provenance = pipeline.provenance()
    estimates = {}
    for track_id, signal in tracked.items():
        source_id = provenance.get(track_id, track_id)
        if source_id in estimates:
            estimates[source_id] = estimates[source_id] + signal
        else:
            estimates[source_id] = signal

    return RunResult(
        config=config,
        mono=mono[:n_input],
        stereo=stereo[:, :n_input],
        estimates={k: v[:n_input] for k, v in estimates.items()},
        residuals={k: v[:n_input] for k, v in residuals.items()},
        timings=list(pipeline.timings),
        provenance=provenance,
        n_chunks=n_chunks,
        stale_chunks=stale_chunks,
    )
