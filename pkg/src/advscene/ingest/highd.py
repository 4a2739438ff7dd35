"""highD recording parser.

Reads the standard CSV triplet (XX_tracks.csv, XX_tracksMeta.csv,
XX_recordingMeta.csv). highD stores box positions as top-left corners and
calls the vehicle length "width" and the vehicle width "height"; both are
normalized here at parse time so every downstream module sees box centers
and (length, width) footprints.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from advscene.errors import ParseError, SchemaError
from advscene.scene.types import Lane, RoadMap

TRACK_COLUMNS = (
    "frame",
    "id",
    "x",
    "y",
    "width",
    "height",
    "xVelocity",
    "yVelocity",
    "xAcceleration",
    "yAcceleration",
    "laneId",
)
TRACK_META_COLUMNS = ("id", "width", "height", "class", "drivingDirection")
RECORDING_META_COLUMNS = ("id", "frameRate", "upperLaneMarkings", "lowerLaneMarkings")

UPPER_DIRECTION = 1
LOWER_DIRECTION = 2


@dataclass
class Track:
    track_id: int
    frames: np.ndarray
    x: np.ndarray  # box-center x
    y: np.ndarray  # box-center y
    vx: np.ndarray
    vy: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    lane_ids: np.ndarray
    length: float
    width: float
    vehicle_class: str
    driving_direction: int

    @property
    def first_frame(self) -> int:
        return int(self.frames[0])

    @property
    def last_frame(self) -> int:
        return int(self.frames[-1])


@dataclass
class Recording:
    recording_id: int
    frame_rate: float
    tracks: Dict[int, Track]
    road: RoadMap

    @property
    def dt(self) -> float:
        return 1.0 / self.frame_rate

    @property
    def frame_range(self) -> Tuple[int, int]:
        lo = min(t.first_frame for t in self.tracks.values())
        hi = max(t.last_frame for t in self.tracks.values())
        return lo, hi


def _read_csv(path: str | Path, required: Tuple[str, ...]) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path.name}: missing column {col!r}")
        return list(reader)


def _num(row: Dict[str, str], col: str, path_name: str, line: int) -> float:
    try:
        return float(row[col])
    except (TypeError, ValueError) as exc:
        raise ParseError(
            f"{path_name} row {line}: non-numeric value {row[col]!r} in column {col!r}"
        ) from exc


def _markings(raw: str) -> List[float]:
    return [float(tok) for tok in raw.replace('"', "").split(";") if tok.strip()]


def _road_from_markings(
    upper: List[float], lower: List[float], x_range: Tuple[float, float]
) -> RoadMap:
    lanes: List[Lane] = []
    bounds: Dict[int, Tuple[float, float]] = {}
    lane_id = 1
    for direction, marks in ((UPPER_DIRECTION, upper), (LOWER_DIRECTION, lower)):
        if len(marks) < 2:
            continue
        bounds[direction] = (marks[0], marks[-1])
        for lo, hi in zip(marks[:-1], marks[1:]):
            lanes.append(
                Lane(
                    lane_id=lane_id,
                    y_center=(lo + hi) / 2.0,
                    width=hi - lo,
                    direction=direction,
                )
            )
            lane_id += 1
    return RoadMap(lanes=tuple(lanes), bounds=bounds, x_range=x_range)


def parse_recording(
    tracks_csv: str | Path,
    tracks_meta_csv: str | Path,
    recording_meta_csv: str | Path,
) -> Recording:
    """Parse one highD recording into center-convention tracks plus a RoadMap."""
    meta_rows = _read_csv(recording_meta_csv, RECORDING_META_COLUMNS)
    if not meta_rows:
        raise SchemaError(f"{recording_meta_csv}: empty recording meta")
    meta = meta_rows[0]
    recording_id = int(_num(meta, "id", "recordingMeta", 2))
    frame_rate = _num(meta, "frameRate", "recordingMeta", 2)

    track_meta: Dict[int, Dict[str, str]] = {}
    for i, row in enumerate(_read_csv(tracks_meta_csv, TRACK_META_COLUMNS), start=2):
        track_meta[int(_num(row, "id", "tracksMeta", i))] = row

    per_track: Dict[int, List[Tuple[float, ...]]] = {}
    name = Path(tracks_csv).name
    for i, row in enumerate(_read_csv(tracks_csv, TRACK_COLUMNS), start=2):
        tid = int(_num(row, "id", name, i))
        vals = tuple(_num(row, c, name, i) for c in TRACK_COLUMNS if c != "id")
        per_track.setdefault(tid, []).append(vals)

    tracks: Dict[int, Track] = {}
    for tid, rows in per_track.items():
        rows.sort(key=lambda r: r[0])
        arr = np.array(rows, dtype=np.float64)
        frames = arr[:, 0].astype(np.int64)
        if frames.size > 1 and not np.all(np.diff(frames) == 1):
            raise ParseError(f"{name}: track {tid} has non-contiguous frames")
        meta_row = track_meta.get(tid)
        if meta_row is None:
            raise SchemaError(f"tracksMeta: no entry for track {tid}")
        length = float(meta_row["width"])  # highD naming: width == vehicle length
        width = float(meta_row["height"])
        tracks[tid] = Track(
            track_id=tid,
            frames=frames,
            x=arr[:, 1] + arr[:, 3] / 2.0,  # corner -> center using per-row size
            y=arr[:, 2] + arr[:, 4] / 2.0,
            vx=arr[:, 5],
            vy=arr[:, 6],
            ax=arr[:, 7],
            ay=arr[:, 8],
            lane_ids=arr[:, 9].astype(np.int64),
            length=length,
            width=width,
            vehicle_class=meta_row["class"],
            driving_direction=int(float(meta_row["drivingDirection"])),
        )

    xs = np.concatenate([t.x for t in tracks.values()]) if tracks else np.array([0.0, 420.0])
    road = _road_from_markings(
        _markings(meta.get("upperLaneMarkings", "")),
        _markings(meta.get("lowerLaneMarkings", "")),
        (float(math.floor(xs.min() - 10.0)), float(math.ceil(xs.max() + 10.0))),
    )
    return Recording(
        recording_id=recording_id, frame_rate=frame_rate, tracks=tracks, road=road
    )
