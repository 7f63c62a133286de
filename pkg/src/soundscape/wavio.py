"""32-bit float WAV read/write (RIFF, little-endian) via scipy."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile


def write_wav(path: str | Path, sample_rate: int, samples: np.ndarray) -> None:
    """Write mono (n,) or stereo (2, n) float audio as IEEE-float WAV."""
    data = np.asarray(samples, dtype=np.float32)
    if data.ndim == 2:
        data = data.T.copy()  # scipy expects (n_samples, n_channels)
    wavfile.write(str(path), sample_rate, data)


def read_wav(path: str | Path) -> tuple[int, np.ndarray]:
    """Read a WAV file; mono returns (n,), stereo returns (2, n), float64."""
    rate, data = wavfile.read(str(path))
    if data.dtype == np.int16:
        data = data / 32768.0
    elif data.dtype == np.int32:
        data = data / 2147483648.0
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data.T
    return int(rate), data
