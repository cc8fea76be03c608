"""Beacon state tracking.

Each beacon carries a visibility state machine (stationary / moving /
disappeared), its last image- and world-frame positions, and the time it was
last detected. A beacon is declared moving when a detection displaces it by
more than 5% of either calibrated image extent, and disappeared once no
detection has arrived for 3 seconds.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ClockRegression
from .vision import Blob, WorkspaceCalib, pixel_to_world

STATIONARY = "stationary"
MOVING = "moving"
DISAPPEARED = "disappeared"


@dataclass(frozen=True)
class Detection:
    """One confirmed beacon observation in a sensor frame."""

    color_class: str
    pos_image: tuple[float, float]
    pos_real: tuple[float, float]


@dataclass(frozen=True)
class TrackerConfig:
    move_fraction: float = 0.05       # of x'_max / y'_max, per axis
    disappear_after: float = 3.0      # seconds without detection
    gate_fraction: float = 0.20       # of image diagonal, association cutoff
    prune_after: float = 10.0         # seconds disappeared before garbage collection


@dataclass(frozen=True)
class BeaconTrack:
    id: int
    color_class: str  # "orange" = reach target, "green" = stop cue
    visibility: str
    pos_image: tuple[float, float]
    pos_real: tuple[float, float]
    t_vis: float

    @property
    def visible(self) -> bool:
        return self.visibility != DISAPPEARED

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "color": self.color_class,
            "visibility": self.visibility,
            "pos_image": list(self.pos_image),
            "pos_real": list(self.pos_real),
            "t_vis": self.t_vis,
        }


def update_track(
    track: BeaconTrack,
    detection: Detection | None,
    now: float,
    calib: WorkspaceCalib,
    cfg: TrackerConfig = TrackerConfig(),
) -> BeaconTrack:
    """Advance one track by one sensor frame.

    With a detection the displacement since the previous detection decides
    stationary versus moving. Without one the track keeps its state until the
    disappearance delay has elapsed; positions are always retained.
    """
    if now < track.t_vis:
        raise ClockRegression(f"update at t={now} precedes last detection t={track.t_vis}")
    if detection is None:
        if now - track.t_vis > cfg.disappear_after and track.visibility != DISAPPEARED:
            return replace(track, visibility=DISAPPEARED)
        return track
    dx = abs(detection.pos_image[0] - track.pos_image[0])
    dy = abs(detection.pos_image[1] - track.pos_image[1])
    moving = dx > cfg.move_fraction * calib.x_max_prime or dy > cfg.move_fraction * calib.y_max_prime
    return replace(
        track,
        visibility=MOVING if moving else STATIONARY,
        pos_image=detection.pos_image,
        pos_real=detection.pos_real,
        t_vis=now,
    )


def associate(
    tracks: list[BeaconTrack],
    blobs: list[Blob],
    calib: WorkspaceCalib,
    cfg: TrackerConfig = TrackerConfig(),
) -> tuple[dict[int, int], list[int]]:
    """Greedy nearest-neighbor matching of blobs onto tracks per color class.

    Returns (track index -> blob index) for matches plus the indices of
    unmatched blobs. Pairs farther apart than the gate distance never match.
    """
    gate = cfg.gate_fraction * (calib.x_max_prime**2 + calib.y_max_prime**2) ** 0.5
    pairs = []
    for ti, tr in enumerate(tracks):
        for bi, bl in enumerate(blobs):
            if tr.color_class != bl.color_class:
                continue
            d = ((tr.pos_image[0] - bl.centroid[0]) ** 2 + (tr.pos_image[1] - bl.centroid[1]) ** 2) ** 0.5
            if d <= gate:
                pairs.append((d, ti, bi))
    pairs.sort()
    matches: dict[int, int] = {}
    used_blobs: set[int] = set()
    for _, ti, bi in pairs:
        if ti in matches or bi in used_blobs:
            continue
        matches[ti] = bi
        used_blobs.add(bi)
    unmatched = [bi for bi in range(len(blobs)) if bi not in used_blobs]
    return matches, unmatched


class BeaconTracker:
    """Owns the track list; single writer is the simulation loop."""

    def __init__(self, calib: WorkspaceCalib, cfg: TrackerConfig = TrackerConfig()):
        self.calib = calib
        self.cfg = cfg
        self.tracks: list[BeaconTrack] = []
        self._next_id = 0

    def update(self, blobs: list[Blob], now: float) -> None:
        """Apply one sensor frame: associate, update matched, age the rest, spawn new."""
        matches, unmatched = associate(self.tracks, blobs, self.calib, self.cfg)
        updated = []
        for ti, tr in enumerate(self.tracks):
            det = None
            if ti in matches:
                bl = blobs[matches[ti]]
                det = Detection(bl.color_class, bl.centroid, pixel_to_world(self.calib, bl.centroid))
            updated.append(update_track(tr, det, now, self.calib, self.cfg))
        for bi in unmatched:
            bl = blobs[bi]
            updated.append(
                BeaconTrack(
                    id=self._next_id,
                    color_class=bl.color_class,
                    visibility=STATIONARY,
                    pos_image=bl.centroid,
                    pos_real=pixel_to_world(self.calib, bl.centroid),
                    t_vis=now,
                )
            )
            self._next_id += 1
        # drop long-disappeared tracks to bound memory; ids are never reused
        self.tracks = [
            tr for tr in updated
            if tr.visibility != DISAPPEARED or now - tr.t_vis <= self.cfg.disappear_after + self.cfg.prune_after
        ]

    def snapshot(self) -> list[BeaconTrack]:
        return list(self.tracks)
