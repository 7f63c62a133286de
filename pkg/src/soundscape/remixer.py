"""Gain application, ramped remixing, and constant-power stereo panning."""

from __future__ import annotations

import numpy as np

from soundscape.core import GainVector, Stem, clamp_gain

RAMP_SECONDS = 0.010  # linear gain ramp at chunk boundaries; suppresses zipper noise
LIMITER_HEADROOM = 0.25


def set_gain(gains: GainVector, track_id: str, value: float) -> GainVector:
    gains.set(track_id, value)
    return gains


def _gain_curve(n: int, sample_rate: int, prev: float, target: float) -> np.ndarray:
    ramp = min(int(round(RAMP_SECONDS * sample_rate)), n)
    curve = np.full(n, target)
    if ramp > 0 and prev != target:
        curve[:ramp] = np.linspace(prev, target, ramp, endpoint=False)
    return curve


def apply_gains(
    stems: dict[str, Stem],
    gains: dict[str, float],
    prev_gains: dict[str, float],
    sample_rate: int,
) -> dict[str, np.ndarray]:
    """Scale each stem by its (ramped) gain; keys without an entry default to 1."""
    lengths = {len(s.samples) for s in stems.values()}
    if len(lengths) > 1:
        raise ValueError(f"length-mismatch: stems have lengths {sorted(lengths)}")
    out = {}
    for key, stem in stems.items():
        target = clamp_gain(gains.get(key, 1.0))
        prev = clamp_gain(prev_gains.get(key, 1.0))
        n = len(stem.samples)
        out[key] = stem.samples * _gain_curve(n, sample_rate, prev, target)
    return out


def soft_limit(samples: np.ndarray) -> np.ndarray:
    """Identity below |1|; tanh-style squash above, bounded by 1 + headroom."""
    over = np.abs(samples) > 1.0
    if not np.any(over):
        return samples
    out = samples.copy()
    mag = np.abs(samples[over])
    out[over] = np.sign(samples[over]) * (
        1.0 + LIMITER_HEADROOM * np.tanh((mag - 1.0) / LIMITER_HEADROOM)
    )
    return out


def mix_scaled(scaled: dict[str, np.ndarray]) -> np.ndarray:
    """Sum already-scaled stems to one mono chunk, limited above full scale."""
    if not scaled:
        return np.zeros(0)
    return soft_limit(np.sum(list(scaled.values()), axis=0))


def remix(
    stems: dict[str, Stem],
    gains: dict[str, float],
    prev_gains: dict[str, float],
    sample_rate: int,
) -> np.ndarray:
    """Weighted sum of stems under the user gain vector, as one mono chunk."""
    if not stems:
        return np.zeros(0)
    return mix_scaled(apply_gains(stems, gains, prev_gains, sample_rate))


def pan_gains(u: float) -> tuple[float, float]:
    """Constant-power pan: left^2 + right^2 == 1, u=0 hard left, u=1 hard right."""
    theta = np.clip(u, 0.0, 1.0) * np.pi / 2
    return float(np.cos(theta)), float(np.sin(theta))


def pan_scaled(
    scaled: dict[str, np.ndarray], coords: dict[str, tuple[float, float]]
) -> np.ndarray:
    """Pan already-scaled stems individually, then sum per channel."""
    if not scaled:
        return np.zeros((2, 0))
    n = len(next(iter(scaled.values())))
    left = np.zeros(n)
    right = np.zeros(n)
    for key, samples in scaled.items():
        u = coords.get(key, (0.5, 0.5))[0]
        lg, rg = pan_gains(u)
        left += lg * samples
        right += rg * samples
    return np.stack([soft_limit(left), soft_limit(right)])


def pan_stereo(
    stems: dict[str, Stem],
    coords: dict[str, tuple[float, float]],
    gains: dict[str, float],
    prev_gains: dict[str, float],
    sample_rate: int,
) -> np.ndarray:
    """Per-stem constant-power pan by horizontal coordinate, summed per channel.

    Returns shape (2, n) [left, right]; stems without coords pan center.
    """
    if not stems:
        return np.zeros((2, 0))
    return pan_scaled(apply_gains(stems, gains, prev_gains, sample_rate), coords)
