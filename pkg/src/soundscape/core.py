"""Shared domain types, configuration, and validation.

Everything downstream (separation, pipeline, remixer, control) builds on the
value objects defined here. All of them are immutable once constructed except
SourceTrack (whose gain clamps on write) and GainVector (the one mutable
shared object; cross-stage access goes through snapshots).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SoundscapeError(Exception):
    """Base class for engine errors."""


class ConfigError(SoundscapeError):
    """Invalid pipeline configuration; message names the violated field."""


class StreamError(SoundscapeError):
    """Chunk stream contract violation (ordering, length)."""


SPEAKER_KIND = "speaker"
NOISE_KIND = "noise"

# The fixed instrument taxonomy the refinement stage activates against.
INSTRUMENT_CLASSES = ("Vocal", "Piano", "Violin", "Cello", "Bass", "Guitar", "Flute")

# Coarse separation always yields exactly these three stems.
COARSE_LABELS = ("speech", "music", "noise")

GAIN_MIN = 0.0
GAIN_MAX = 10.0


def clamp_gain(value: float) -> float:
    return min(max(float(value), GAIN_MIN), GAIN_MAX)


def _as_readonly(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"samples must be 1-D mono, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AudioChunk:
    """One fixed-duration block of mono samples; the unit of streaming."""

    sample_rate: int
    samples: np.ndarray
    seq_index: int
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_readonly(self.samples))
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.seq_index < 0:
            raise ValueError("seq_index must be nonnegative")
        expected = int(round(self.sample_rate * self.duration))
        if len(self.samples) != expected:
            raise ValueError(
                f"chunk length {len(self.samples)} != round(sample_rate*duration) = {expected}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("chunk contains non-finite samples")

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def start_time(self) -> float:
        return self.seq_index * self.duration


@dataclass(frozen=True)
class RollingWindow:
    """Bounded contiguous run of chunks; the temporal context fed to separation."""

    window_duration: float
    chunks: tuple[AudioChunk, ...] = ()

    def append(self, chunk: AudioChunk) -> "RollingWindow":
        """New window with `chunk` appended and the oldest chunks evicted."""
        if self.chunks and chunk.seq_index != self.chunks[-1].seq_index + 1:
            raise StreamError(
                f"out-of-order-chunk: got seq {chunk.seq_index}, "
                f"expected {self.chunks[-1].seq_index + 1}"
            )
        chunks = list(self.chunks) + [chunk]
        total = sum(c.duration for c in chunks)
        while total > self.window_duration + 1e-9:
            total -= chunks[0].duration
            chunks.pop(0)
        return RollingWindow(self.window_duration, tuple(chunks))

    @property
    def duration(self) -> float:
        return sum(c.duration for c in self.chunks)

    def samples(self) -> np.ndarray:
        if not self.chunks:
            return np.zeros(0)
        return np.concatenate([c.samples for c in self.chunks])

    def __len__(self) -> int:
        return len(self.chunks)


@dataclass(frozen=True)
class Stem:
    """A separated signal, labeled with its source identity."""

    label: str
    samples: np.ndarray
    track_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_readonly(self.samples))

    def energy(self) -> float:
        return float(np.sum(self.samples**2))


@dataclass
class SourceTrack:
    """Persistent identity for a sound source: class, screen position, user gain."""

    id: str
    kind: str
    coords: tuple[float, float]
    gain: float = 1.0
    active: bool = True
    band: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind != SPEAKER_KIND and self.kind not in INSTRUMENT_CLASSES:
            raise ValueError(f"unknown track kind {self.kind!r}")
        u, v = self.coords
        if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
            raise ValueError(f"coords {self.coords} outside [0,1]^2")

    def __setattr__(self, name, value):
        if name == "gain":
            value = clamp_gain(value)
        super().__setattr__(name, value)


@dataclass(frozen=True)
class PipelineConfig:
    """Streaming geometry and separation knobs.

    window_size is the rolling context duration, chunk_size the streaming
    unit; the window must be an integer multiple of the chunk so buffer
    eviction is exact.
    """

    window_size: float = 60.0
    chunk_size: float = 1.0
    sample_rate: int = 16000
    tau: float = 0.5
    stft_frame: int = 512
    stft_hop: int = 256

    @property
    def chunk_samples(self) -> int:
        return int(round(self.sample_rate * self.chunk_size))

    @property
    def window_chunks(self) -> int:
        return int(round(self.window_size / self.chunk_size))


def validate_config(config: PipelineConfig) -> PipelineConfig:
    """Return `config` unchanged iff all invariants hold; raise ConfigError otherwise."""
    if config.sample_rate <= 0:
        raise ConfigError("sample_rate: must be a positive integer")
    if config.chunk_size <= 0:
        raise ConfigError("chunk_size: must be positive")
    if config.window_size <= 0:
        raise ConfigError("window_size: must be positive")
    if config.chunk_size > config.window_size + 1e-12:
        raise ConfigError("chunk_size: must not exceed window_size")
    ratio = config.window_size / config.chunk_size
    if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
        raise ConfigError(
            f"window_size: window-not-multiple-of-chunk ({config.window_size}/{config.chunk_size})"
        )
    if not (0.0 <= config.tau <= 1.0):
        raise ConfigError(f"tau: tau-out-of-range ({config.tau})")
    frame = config.stft_frame
    if frame <= 0 or (frame & (frame - 1)) != 0:
        raise ConfigError(f"stft_frame: must be a positive power of two ({frame})")
    if not (0 < config.stft_hop <= config.stft_frame):
        raise ConfigError("stft_hop: must satisfy 0 < hop <= frame")
    if config.chunk_samples < config.stft_frame:
        raise ConfigError(
            f"chunk_size: chunk of {config.chunk_samples} samples is shorter than one STFT frame"
        )
    return config


def snapped_config(window_size: float, chunk_size: float, **kwargs) -> PipelineConfig:
    """Config with window_size snapped to the nearest chunk multiple.

    Used by the bench/CLI so sweeps like window=1 s at chunk=0.15 s stay
    runnable; direct construction keeps the strict multiple invariant.
    """
    n = max(1, int(round(window_size / chunk_size)))
    return validate_config(
        PipelineConfig(window_size=n * chunk_size, chunk_size=chunk_size, **kwargs)
    )


@dataclass
class GainVector:
    """User gain per track id; missing tracks default to unit gain.

    Mutable and shared between the control server and the pipeline; the
    pipeline reads it only via snapshot() at chunk boundaries.
    """

    entries: dict[str, float] = field(default_factory=dict)

    def get(self, track_id: str) -> float:
        return self.entries.get(track_id, 1.0)

    def set(self, track_id: str, value: float) -> None:
        self.entries[track_id] = clamp_gain(value)

    def snapshot(self) -> dict[str, float]:
        return dict(self.entries)
