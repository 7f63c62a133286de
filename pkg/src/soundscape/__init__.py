"""Real-time chunk-streamed audio source separation and interactive remixing."""

from soundscape.core import (
    COARSE_LABELS,
    INSTRUMENT_CLASSES,
    AudioChunk,
    ConfigError,
    GainVector,
    PipelineConfig,
    RollingWindow,
    SourceTrack,
    Stem,
    StreamError,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "AudioChunk",
    "COARSE_LABELS",
    "ConfigError",
    "GainVector",
    "INSTRUMENT_CLASSES",
    "PipelineConfig",
    "RollingWindow",
    "SourceTrack",
    "Stem",
    "StreamError",
    "validate_config",
    "__version__",
]
