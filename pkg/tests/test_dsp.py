from __future__ import annotations

import numpy as np
import pytest

from soundscape.core import SourceTrack, Stem
from soundscape.dsp import (
    BandProfile,
    coarse_separate,
    default_coarse_profile,
    default_instrument_profile,
    hann_window,
    istft,
    mixture_consistency,
    refine_music,
    refine_speech,
    si_sdr,
    stft,
)

SR = 16000


def band_energy_fraction(signal: np.ndarray, lo: float, hi: float, sr: int = SR) -> float:
    """Independent oracle: energy fraction inside [lo, hi) via one full-length FFT."""
    spec = np.fft.rfft(signal)
    freqs = np.fft.rfftfreq(len(signal), 1.0 / sr)
    total = np.sum(np.abs(spec) ** 2)
    if total == 0:
        return 0.0
    inside = (freqs >= lo) & (freqs < hi)
    return float(np.sum(np.abs(spec[inside]) ** 2) / total)


# ── stft / istft ─────────────────────────────────────────────────────────────


def test_stft_zero_signal():
    spec = stft(np.zeros(4096), 512, 256, SR)
    assert np.all(spec.frames == 0)
    assert spec.frames.shape[1] == 512 // 2 + 1


def test_stft_matches_direct_summation_oracle():
    # One interior frame recomputed by direct windowed DFT summation.
    rng = np.random.default_rng(1)
    x = rng.standard_normal(4096)
    frame_len, hop = 512, 256
    spec = stft(x, frame_len, hop, SR)
    m = 6  # interior frame index
    pad = frame_len // 2
    start = m * hop - pad
    segment = x[start : start + frame_len]
    window = hann_window(frame_len)
    k = 37
    oracle = np.sum(segment * window * np.exp(-2j * np.pi * k * np.arange(frame_len) / frame_len))
    assert abs(spec.frames[m, k] - oracle) < 1e-9


def test_sine_at_bin_center_concentrates():
    # Hann windowing spreads a bin-centered sine over bins k-1..k+1 (the
    # window's 3-bin main lobe); that neighborhood carries ~all frame energy
    # and bin k is the peak. Verified against direct-summation DFT.
    frame_len = 512
    k = 20
    f = k * SR / frame_len
    t = np.arange(SR) / SR
    x = np.sin(2 * np.pi * f * t)
    spec = stft(x, frame_len, 256, SR)
    interior = np.abs(spec.frames[4:-4]) ** 2
    neighborhood = interior[:, k - 1 : k + 2].sum()
    assert neighborhood / interior.sum() >= 0.95
    assert np.all(np.argmax(interior, axis=1) == k)


def test_istft_roundtrip_100_random_signals():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(600, 3000))
        x = rng.standard_normal(n)
        err = np.max(np.abs(istft(stft(x, 512, 256, SR)) - x))
        worst = max(worst, err)
    assert worst < 1e-6


def test_stft_signal_too_short():
    with pytest.raises(ValueError, match="signal-too-short"):
        stft(np.zeros(100), 512, 256, SR)


# ── mixture consistency ──────────────────────────────────────────────────────


def test_consistency_equal_redistribution():
    mixture = np.array([3.0, 3.0])
    stems = [Stem("a", [1.0, 1.0]), Stem("b", [1.0, 1.0]), Stem("c", [0.0, 0.0])]
    fixed = mixture_consistency(mixture, stems)
    np.testing.assert_allclose(fixed[0].samples, [4 / 3, 4 / 3])
    np.testing.assert_allclose(fixed[1].samples, [4 / 3, 4 / 3])
    np.testing.assert_allclose(fixed[2].samples, [1 / 3, 1 / 3])


def test_consistency_noop_when_already_consistent():
    mixture = np.array([1.0, 2.0, 3.0])
    stems = [Stem("a", [0.5, 1.0, 1.5]), Stem("b", [0.5, 1.0, 1.5])]
    fixed = mixture_consistency(mixture, stems)
    for before, after in zip(stems, fixed):
        np.testing.assert_array_equal(before.samples, after.samples)


def test_consistency_property_100_random_cases():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(4, 200))
        m = int(rng.integers(1, 6))
        mixture = rng.standard_normal(n)
        stems = [Stem(f"s{i}", rng.standard_normal(n)) for i in range(m)]
        fixed = mixture_consistency(mixture, stems)
        total = np.sum([s.samples for s in fixed], axis=0)
        assert np.max(np.abs(total - mixture)) < 1e-9


def test_consistency_length_mismatch():
    with pytest.raises(ValueError, match="length-mismatch"):
        mixture_consistency(np.zeros(4), [Stem("a", np.zeros(3))])


# ── coarse separation ────────────────────────────────────────────────────────


def test_coarse_sine_lands_in_speech_stem():
    t = np.arange(SR) / SR
    x = np.sin(2 * np.pi * 500.0 * t)
    stems = coarse_separate(x, default_coarse_profile(SR))
    speech = stems[0]
    assert speech.label == "speech"
    # Oracle: input is entirely inside the speech band.
    assert band_energy_fraction(x, 300, 3400) > 0.999
    assert speech.energy() / np.sum(x**2) >= 0.99


def test_coarse_silent_window():
    stems = coarse_separate(np.zeros(SR), default_coarse_profile(SR))
    assert [s.label for s in stems] == ["speech", "music", "noise"]
    for stem in stems:
        assert np.max(np.abs(stem.samples)) < 1e-12


def test_coarse_stems_sum_to_window():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(SR)
    stems = coarse_separate(x, default_coarse_profile(SR))
    total = np.sum([s.samples for s in stems], axis=0)
    assert np.max(np.abs(total - x)) < 1e-9


def test_coarse_empty_window():
    with pytest.raises(ValueError, match="empty-window"):
        coarse_separate(np.zeros(0), default_coarse_profile(SR))


def test_energy_non_creation_before_consistency():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(SR)
    profile = default_coarse_profile(SR)
    spec = stft(x, 512, 256, SR)
    freqs = spec.bin_freqs
    input_energy = np.sum(x**2)
    for label in ("speech", "music", "noise"):
        masked = istft(spec.masked(profile.mask(label, freqs)))
        assert np.sum(masked**2) <= input_energy * (1 + 1e-6)


# ── refinement ───────────────────────────────────────────────────────────────


def _tone(freq: float, seconds: float = 1.0) -> np.ndarray:
    t = np.arange(int(SR * seconds)) / SR
    return np.sin(2 * np.pi * freq * t)


def test_refine_music_no_activation():
    stem = Stem("music", _tone(5000.0))
    out = refine_music(stem, set(), default_instrument_profile(SR))
    assert len(out) == 1
    assert out[0].label == "other-music"
    np.testing.assert_array_equal(out[0].samples, stem.samples)


def test_refine_music_two_instruments_disjoint():
    profile = default_instrument_profile(SR)
    violin_band = profile.bands["Violin"][0]
    piano_band = profile.bands["Piano"][0]
    violin_tone = _tone(0.5 * (violin_band[0] + violin_band[1]))
    piano_tone = _tone(0.5 * (piano_band[0] + piano_band[1]))
    stem = Stem("music", violin_tone + piano_tone)
    out = refine_music(stem, {"Violin", "Piano"}, profile)
    by_label = {s.label: s for s in out}
    assert set(by_label) == {"instrument:Piano", "instrument:Violin", "other-music"}
    violin_est = by_label["instrument:Violin"].samples
    piano_est = by_label["instrument:Piano"].samples
    assert band_energy_fraction(violin_est, *violin_band) >= 0.99
    assert band_energy_fraction(piano_est, *piano_band) >= 0.99
    total = np.sum([s.samples for s in out], axis=0)
    assert np.max(np.abs(total - stem.samples)) < 1e-9


def test_refine_music_missing_band():
    profile = BandProfile({"Violin": [(4000.0, 5000.0)]}, SR)
    with pytest.raises(ValueError, match="missing-band-for-active-class"):
        refine_music(Stem("music", _tone(4500.0)), {"Violin", "Piano"}, profile)


def test_refine_speech_single_full_band_anchor():
    speech = Stem("speech", _tone(1000.0))
    anchor = SourceTrack("t1", "speaker", (0.5, 0.5), band=(300.0, 3400.0))
    out = refine_speech(speech, [anchor], SR)
    by_label = {s.label: s for s in out}
    stem = by_label["speaker:t1"]
    assert stem.track_id == "t1"
    # Full-band mask: anchor stem carries ~everything, residual ~nothing
    # (small leftovers come from signal-edge truncation leakage).
    assert si_sdr(speech.samples, stem.samples) > 30.0
    assert by_label["residual-speech"].energy() < 1e-3 * speech.energy()


def test_refine_speech_two_disjoint_anchors():
    a = SourceTrack("t1", "speaker", (0.2, 0.5), band=(300.0, 900.0))
    b = SourceTrack("t2", "speaker", (0.8, 0.5), band=(1000.0, 1600.0))
    speech = Stem("speech", _tone(600.0) + _tone(1300.0))
    out = refine_speech(speech, [a, b], SR)
    by_id = {s.track_id: s for s in out if s.track_id}
    assert band_energy_fraction(by_id["t1"].samples, 300, 900) >= 0.99
    assert band_energy_fraction(by_id["t2"].samples, 1000, 1600) >= 0.99
    total = np.sum([s.samples for s in out], axis=0)
    assert np.max(np.abs(total - speech.samples)) < 1e-9


def test_refine_speech_zero_anchors():
    speech = Stem("speech", _tone(1000.0))
    out = refine_speech(speech, [], SR)
    assert len(out) == 1
    assert out[0].label == "residual-speech"
    np.testing.assert_array_equal(out[0].samples, speech.samples)


def test_refine_speech_anchor_without_band():
    anchor = SourceTrack("t1", "speaker", (0.5, 0.5))
    with pytest.raises(ValueError, match="anchor-without-band"):
        refine_speech(Stem("speech", _tone(1000.0)), [anchor], SR)


def test_band_mask_idempotence():
    # Masking an already-masked signal again barely moves its SI-SDR against
    # the in-band ground truth. Scored on the interior: the signal's hard
    # start/stop edges spread energy across the band boundary on every
    # re-analysis, so idempotence is a steady-state property.
    rng = np.random.default_rng(6)
    truth = _tone(1000.0)
    mixture = truth + 0.5 * _tone(5000.0) + 0.01 * rng.standard_normal(SR)
    profile = default_coarse_profile(SR)
    spec = stft(mixture, 512, 256, SR)
    mask = profile.mask("speech", spec.bin_freqs)
    once = istft(spec.masked(mask))
    twice = istft(stft(once, 512, 256, SR).masked(mask))
    sl = slice(512, -512)
    assert abs(si_sdr(truth[sl], once[sl]) - si_sdr(truth[sl], twice[sl])) < 0.1


# ── SI-SDR ───────────────────────────────────────────────────────────────────


def test_si_sdr_perfect_estimate_caps():
    x = np.array([0.3, -0.2, 0.9])
    assert si_sdr(x, x) == 100.0


def test_si_sdr_hand_computed_projection():
    # alpha = 0.5, s_target = [0.5, 0.5], e = [0.5, -0.5] -> 0 dB exactly.
    assert abs(si_sdr(np.array([1.0, 1.0]), np.array([1.0, 0.0]))) < 1e-9


def test_si_sdr_scale_invariance():
    rng = np.random.default_rng(7)
    ref = rng.standard_normal(1000)
    est = ref + 0.1 * rng.standard_normal(1000)
    base = si_sdr(ref, est)
    for c in (0.1, 1.0, 10.0):
        assert abs(si_sdr(ref, c * est) - base) < 1e-6


def test_si_sdr_errors():
    with pytest.raises(ValueError, match="zero-reference"):
        si_sdr(np.zeros(4), np.ones(4))
    with pytest.raises(ValueError, match="length-mismatch"):
        si_sdr(np.ones(4), np.ones(5))
