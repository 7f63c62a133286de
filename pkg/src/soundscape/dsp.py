"""Signal kernels: STFT/ISTFT, band-mask separators, mixture consistency, SI-SDR.

The separators here are deterministic stand-ins for learned models: each
source category owns a set of frequency bands, separation is a binary
spectral mask over those bands, and every stage ends with a mixture
consistency projection so the stems sum back to the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from soundscape.core import COARSE_LABELS, SPEAKER_KIND, SourceTrack, Stem

SI_SDR_EPS = 1e-12
SI_SDR_CAP_DB = 100.0


def hann_window(n: int) -> np.ndarray:
    # Periodic variant; the symmetric one breaks the overlap-add identity.
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


@dataclass(frozen=True)
class Spectrogram:
    """Frequency-domain workspace: complex frames (time x bin) plus geometry."""

    frames: np.ndarray
    sample_rate: int
    frame_len: int
    hop: int
    signal_len: int

    def __post_init__(self):
        if self.frames.shape[1] != self.frame_len // 2 + 1:
            raise ValueError("bin count must equal frame_len/2 + 1")

    @property
    def bin_freqs(self) -> np.ndarray:
        return np.fft.rfftfreq(self.frame_len, 1.0 / self.sample_rate)

    def masked(self, mask: np.ndarray) -> "Spectrogram":
        return Spectrogram(
            self.frames * mask[None, :], self.sample_rate, self.frame_len, self.hop, self.signal_len
        )


@dataclass(frozen=True)
class BandProfile:
    """Frequency intervals per stem label; the deterministic separation 'parameters'."""

    bands: dict[str, list[tuple[float, float]]]
    sample_rate: int

    def __post_init__(self):
        nyquist = self.sample_rate / 2
        for label, intervals in self.bands.items():
            for lo, hi in intervals:
                if not (0 <= lo < hi <= nyquist):
                    raise ValueError(f"band [{lo}, {hi}] for {label!r} outside [0, {nyquist}]")

    def labels(self) -> set[str]:
        return set(self.bands)

    def mask(self, label: str, bin_freqs: np.ndarray) -> np.ndarray:
        m = np.zeros(len(bin_freqs), dtype=bool)
        for lo, hi in self.bands[label]:
            m |= (bin_freqs >= lo) & (bin_freqs < hi)
        return m


def default_coarse_profile(sample_rate: int = 16000) -> BandProfile:
    nyquist = sample_rate / 2
    return BandProfile(
        {
            "speech": [(300.0, 3400.0)],
            "music": [(3400.0, min(8000.0, nyquist))],
            "noise": [(0.0, 300.0)],
        },
        sample_rate,
    )


def default_instrument_profile(sample_rate: int = 16000) -> BandProfile:
    """Seven disjoint sub-bands of the music band, one per instrument class."""
    from soundscape.core import INSTRUMENT_CLASSES

    lo, hi = 3400.0, min(8000.0, sample_rate / 2)
    edges = np.linspace(lo, hi, len(INSTRUMENT_CLASSES) + 1)
    return BandProfile(
        {cls: [(float(edges[i]), float(edges[i + 1]))] for i, cls in enumerate(INSTRUMENT_CLASSES)},
        sample_rate,
    )


def stft(signal: np.ndarray, frame_len: int, hop: int, sample_rate: int) -> Spectrogram:
    """Hann-windowed overlapped transform, zero-padded so istft restores length exactly."""
    if frame_len <= 0 or (frame_len & (frame_len - 1)) != 0:
        raise ValueError("frame_len must be a power of two")
    if hop > frame_len or hop <= 0:
        raise ValueError("hop must satisfy 0 < hop <= frame_len")
    signal = np.asarray(signal, dtype=np.float64)
    if len(signal) < frame_len:
        raise ValueError(f"signal-too-short: {len(signal)} < frame {frame_len}")
    pad = frame_len // 2
    padded = np.pad(signal, (pad, pad))
    n_frames = 1 + int(np.ceil((len(padded) - frame_len) / hop))
    total = (n_frames - 1) * hop + frame_len
    padded = np.pad(padded, (0, total - len(padded)))
    window = hann_window(frame_len)
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = np.fft.rfft(padded[idx] * window[None, :], axis=1)
    return Spectrogram(frames, sample_rate, frame_len, hop, len(signal))


def istft(spec: Spectrogram) -> np.ndarray:
    """Weighted overlap-add inverse; exact round-trip for unmodified spectra."""
    frame_len, hop = spec.frame_len, spec.hop
    window = hann_window(frame_len)
    frames = np.fft.irfft(spec.frames, n=frame_len, axis=1) * window[None, :]
    n_frames = spec.frames.shape[0]
    total = (n_frames - 1) * hop + frame_len
    out = np.zeros(total)
    wsum = np.zeros(total)
    wsq = window * window
    for m in range(n_frames):
        out[m * hop : m * hop + frame_len] += frames[m]
        wsum[m * hop : m * hop + frame_len] += wsq
    pad = frame_len // 2
    out = out[pad : pad + spec.signal_len]
    norm = wsum[pad : pad + spec.signal_len]
    good = norm > 1e-10
    out[good] /= norm[good]
    return out


def mixture_consistency(mixture: np.ndarray, stems: list[Stem]) -> list[Stem]:
    """Redistribute the residual equally so the stems sum to the mixture exactly."""
    if not stems:
        raise ValueError("need at least one stem")
    mixture = np.asarray(mixture, dtype=np.float64)
    for stem in stems:
        if len(stem.samples) != len(mixture):
            raise ValueError(
                f"length-mismatch: stem {stem.label!r} has {len(stem.samples)} samples, "
                f"mixture has {len(mixture)}"
            )
    residual = mixture - np.sum([s.samples for s in stems], axis=0)
    share = residual / len(stems)
    return [Stem(s.label, s.samples + share, s.track_id) for s in stems]


def _masked_stems(
    spec: Spectrogram, labeled_masks: list[tuple[str, str | None, np.ndarray]], residual_label: str
) -> list[Stem]:
    """One stem per mask plus a residual stem over the uncovered bins."""
    covered = np.zeros(spec.frames.shape[1], dtype=bool)
    stems = []
    for label, track_id, mask in labeled_masks:
        covered |= mask
        stems.append(Stem(label, istft(spec.masked(mask)), track_id))
    stems.append(Stem(residual_label, istft(spec.masked(~covered))))
    return stems


def coarse_separate(
    samples: np.ndarray, profile: BandProfile, frame_len: int = 512, hop: int = 256
) -> list[Stem]:
    """Split a mixture into speech/music/noise stems that sum back to it exactly."""
    missing = set(COARSE_LABELS) - profile.labels()
    if missing:
        raise ValueError(f"profile missing coarse labels {sorted(missing)}")
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) == 0:
        raise ValueError("empty-window")
    spec = stft(samples, frame_len, hop, profile.sample_rate)
    freqs = spec.bin_freqs
    speech_mask = profile.mask("speech", freqs)
    music_mask = profile.mask("music", freqs) & ~speech_mask
    noise_mask = ~(speech_mask | music_mask)  # noise absorbs all unclaimed bins
    stems = [
        Stem("speech", istft(spec.masked(speech_mask))),
        Stem("music", istft(spec.masked(music_mask))),
        Stem("noise", istft(spec.masked(noise_mask))),
    ]
    return mixture_consistency(samples, stems)


def refine_music(
    music_stem: Stem,
    active: set[str],
    profile: BandProfile,
    frame_len: int = 512,
    hop: int = 256,
) -> list[Stem]:
    """Per-instrument stems for the active classes plus an 'other-music' residual.

    Inactive classes produce no stem: only the detected instruments' separators
    run, mirroring the sparse activation of the refinement ensemble.
    """
    from soundscape.core import INSTRUMENT_CLASSES

    unknown = active - set(INSTRUMENT_CLASSES)
    if unknown:
        raise ValueError(f"unknown instrument classes {sorted(unknown)}")
    missing = active - profile.labels()
    if missing:
        raise ValueError(f"missing-band-for-active-class: {sorted(missing)}")
    if not active:
        return [Stem("other-music", music_stem.samples)]
    spec = stft(music_stem.samples, frame_len, hop, profile.sample_rate)
    freqs = spec.bin_freqs
    masks = [
        (f"instrument:{cls}", None, profile.mask(cls, freqs))
        for cls in sorted(active)
    ]
    stems = _masked_stems(spec, masks, "other-music")
    return mixture_consistency(music_stem.samples, stems)


def refine_speech(
    speech_stem: Stem,
    anchors: list[SourceTrack],
    sample_rate: int,
    frame_len: int = 512,
    hop: int = 256,
) -> list[Stem]:
    """Per-speaker stems, one per visual anchor, plus a 'residual-speech' stem."""
    for anchor in anchors:
        if anchor.kind != SPEAKER_KIND:
            raise ValueError(f"anchor {anchor.id!r} is not a speaker track")
        if anchor.band is None:
            raise ValueError(f"anchor-without-band: {anchor.id!r}")
    if not anchors:
        return [Stem("residual-speech", speech_stem.samples)]
    spec = stft(speech_stem.samples, frame_len, hop, sample_rate)
    freqs = spec.bin_freqs
    masks = []
    for anchor in anchors:
        lo, hi = anchor.band
        mask = (freqs >= lo) & (freqs < hi)
        masks.append((f"speaker:{anchor.id}", anchor.id, mask))
    stems = _masked_stems(spec, masks, "residual-speech")
    return mixture_consistency(speech_stem.samples, stems)


def si_sdr(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Scale-invariant signal-to-distortion ratio in dB, clamped to +/-100 dB."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if len(reference) != len(estimate):
        raise ValueError(
            f"length-mismatch: reference {len(reference)} vs estimate {len(estimate)}"
        )
    ref_energy = float(np.dot(reference, reference))
    if ref_energy == 0.0:
        raise ValueError("zero-reference")
    alpha = float(np.dot(estimate, reference)) / ref_energy
    s_target = alpha * reference
    error = estimate - s_target
    num = float(np.dot(s_target, s_target))
    den = float(np.dot(error, error)) + SI_SDR_EPS
    if num <= 0.0:
        return -SI_SDR_CAP_DB
    return float(min(10.0 * np.log10(num / den), SI_SDR_CAP_DB))
