"""Detection replay, threshold activation, and persistent track association.

Detections come from annotation tracks bundled with a scenario (the stand-in
for the face / instrument networks). Association keeps stable track ids by
greedy nearest-neighbor matching with a gating radius so a source that goes
briefly silent reappears under the same id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from soundscape.core import INSTRUMENT_CLASSES, SPEAKER_KIND, SourceTrack

GATE_RADIUS = 0.15
CONFIDENCE_JITTER = 0.1


@dataclass(frozen=True)
class Detection:
    """One detector event: a class seen at screen coords with a confidence."""

    cls: str
    confidence: float
    coords: tuple[float, float]
    timestamp: float
    hint_id: str | None = None  # ground-truth source id, for evaluation only
    band: tuple[float, float] | None = None  # visual-signature stand-in

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0,1]")
        u, v = self.coords
        if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
            raise ValueError(f"coords {self.coords} outside [0,1]^2")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    coords: tuple[float, float]
    confidence: float


@dataclass(frozen=True)
class AnnotationTrack:
    """Serialized detector output for one source across a scenario."""

    source_id: str
    cls: str
    segments: tuple[Segment, ...]
    band: tuple[float, float] | None = None

    def __post_init__(self):
        prev_end = -np.inf
        for seg in self.segments:
            if seg.t_start < prev_end:
                raise ValueError(
                    f"annotation {self.source_id!r}: segments overlap or out of order"
                )
            if seg.t_end <= seg.t_start:
                raise ValueError(f"annotation {self.source_id!r}: empty segment")
            prev_end = seg.t_end


def detect(
    annotations: list[AnnotationTrack], t: float, noise_seed: int | None = None
) -> list[Detection]:
    """Replay annotations at time t; optional seeded confidence jitter of +/-0.1."""
    if t < 0:
        raise ValueError("t must be >= 0")
    rng = None
    if noise_seed is not None:
        # Seed depends on t so jitter varies over time but stays reproducible.
        rng = np.random.default_rng((noise_seed, int(round(t * 1000))))
    out = []
    for track in annotations:
        for seg in track.segments:
            if seg.t_start <= t < seg.t_end:
                conf = seg.confidence
                if rng is not None:
                    conf = float(
                        np.clip(conf + rng.uniform(-CONFIDENCE_JITTER, CONFIDENCE_JITTER), 0.0, 1.0)
                    )
                out.append(
                    Detection(track.cls, conf, seg.coords, t, hint_id=track.source_id,
                              band=track.band)
                )
                break
    return out


def activate(detections: list[Detection], tau: float) -> set[str]:
    """Classes with at least one detection strictly above the confidence threshold."""
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"tau {tau} outside [0,1]")
    return {d.cls for d in detections if d.confidence > tau}


@dataclass
class TrackAssociator:
    """Owns the persistent SourceTrack list; matches detections to tracks.

    Greedy nearest-neighbor on coords with class equality required and a
    gating radius; unmatched detections spawn new tracks, tracks unseen for
    longer than the grace period are retired.
    """

    grace_period: float
    tracks: list[SourceTrack] = field(default_factory=list)
    _last_seen: dict[str, float] = field(default_factory=dict)
    _provenance: dict[str, str] = field(default_factory=dict)
    _counter: int = 0

    def associate(self, detections: list[Detection], now: float) -> dict[str, Detection]:
        """Update tracks from detections at time `now`; return track_id -> detection."""
        candidates = []
        for ti, track in enumerate(self.tracks):
            for di, det in enumerate(detections):
                if det.cls != self._det_class(track):
                    continue
                dist = float(np.hypot(track.coords[0] - det.coords[0],
                                      track.coords[1] - det.coords[1]))
                if dist <= GATE_RADIUS:
                    candidates.append((dist, ti, di))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))

        assigned: dict[str, Detection] = {}
        used_tracks: set[int] = set()
        used_dets: set[int] = set()
        for dist, ti, di in candidates:
            if ti in used_tracks or di in used_dets:
                continue
            used_tracks.add(ti)
            used_dets.add(di)
            track = self.tracks[ti]
            track.coords = detections[di].coords
            track.active = True
            if detections[di].band is not None:
                track.band = detections[di].band
            self._last_seen[track.id] = now
            assigned[track.id] = detections[di]

        for di, det in enumerate(detections):
            if di in used_dets:
                continue
            track = self._spawn(det, now)
            assigned[track.id] = det

        self._retire_and_flag(now, assigned)
        return assigned

    def _det_class(self, track: SourceTrack) -> str:
        return track.kind

    def _spawn(self, det: Detection, now: float) -> SourceTrack:
        if det.cls != SPEAKER_KIND and det.cls not in INSTRUMENT_CLASSES:
            raise ValueError(f"cannot track detection class {det.cls!r}")
        existing = {t.id for t in self.tracks}
        self._counter += 1
        while f"t{self._counter}" in existing:
            self._counter += 1
        track = SourceTrack(id=f"t{self._counter}", kind=det.cls, coords=det.coords,
                            band=det.band)
        self.tracks.append(track)
        self._last_seen[track.id] = now
        if det.hint_id is not None:
            self._provenance[track.id] = det.hint_id
        return track

    def _retire_and_flag(self, now: float, assigned: dict[str, Detection]) -> None:
        kept = []
        for track in self.tracks:
            age = now - self._last_seen[track.id]
            if age > self.grace_period:
                self._last_seen.pop(track.id, None)
                continue  # retired
            track.active = track.id in assigned
            kept.append(track)
        self.tracks = kept

    def provenance(self) -> dict[str, str]:
        """track_id -> ground-truth source id; evaluation metadata only."""
        return dict(self._provenance)
