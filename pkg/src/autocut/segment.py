"""Shot segmentation by neighboring-frame semantic distance, plus per-shot aggregation.

A cut is placed wherever the Euclidean distance between consecutive frames'
semantic vectors exceeds an adaptive threshold mu + k*sigma computed over all
consecutive distances in the stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from autocut.features import FeatureStream, StreamFormatError

DEFAULT_THRESHOLD_K = 3.0


@dataclass(frozen=True)
class Shot:
    """A contiguous frame run with aggregated attributes."""

    shot_id: int
    start_frame: int
    end_frame: int  # inclusive
    start_time_s: float
    duration_s: float
    semantic: tuple[float, ...]  # mean semantic vector
    shot_size_class: int  # 0=close-up, 1=medium, 2=long
    shot_size_vec: tuple[float, float, float]  # per-component median, renormalized
    aesthetic: float  # median of first aesthetic component

    def as_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "start_time_s": self.start_time_s,
            "duration_s": self.duration_s,
            "semantic": list(self.semantic),
            "shot_size_class": self.shot_size_class,
            "shot_size_vec": list(self.shot_size_vec),
            "aesthetic": self.aesthetic,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Shot":
        return cls(
            shot_id=int(obj["shot_id"]),
            start_frame=int(obj["start_frame"]),
            end_frame=int(obj["end_frame"]),
            start_time_s=float(obj["start_time_s"]),
            duration_s=float(obj["duration_s"]),
            semantic=tuple(float(x) for x in obj["semantic"]),
            shot_size_class=int(obj["shot_size_class"]),
            shot_size_vec=tuple(float(x) for x in obj["shot_size_vec"]),
            aesthetic=float(obj["aesthetic"]),
        )


@dataclass(frozen=True)
class ShotList:
    """Shots from one source stream, in source order."""

    source_id: str
    fps_sampled: float
    dim_semantic: int
    shots: tuple[Shot, ...]
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.shots)

    def size_sequence(self) -> list[int]:
        return [s.shot_size_class for s in self.shots]


def consecutive_distances(stream: FeatureStream) -> np.ndarray:
    mat = stream.semantic_matrix()
    return np.linalg.norm(np.diff(mat, axis=0), axis=1)


def detect_boundaries(stream: FeatureStream, threshold_k: float = DEFAULT_THRESHOLD_K) -> list[int]:
    """Boundary frame indices: a boundary at i cuts between frame i-1 and frame i.

    The threshold is mu + k*sigma over all consecutive semantic distances, so
    it adapts to the embedding scale. An infinite k yields no boundaries.
    """
    if len(stream) < 2:
        raise ValueError("boundary detection needs at least 2 frames")
    if not math.isfinite(threshold_k):
        return []
    d = consecutive_distances(stream)
    tau = float(d.mean() + threshold_k * d.std())
    return [int(i) + 1 for i in np.nonzero(d > tau)[0]]


def _lower_median(values: np.ndarray) -> float:
    # Element at index floor((n-1)/2) of the sorted values: stays a member of
    # the observed set, unlike the interpolating median.
    s = np.sort(values)
    return float(s[(len(s) - 1) // 2])


def aggregate_shots(stream: FeatureStream, boundaries: list[int]) -> ShotList:
    """Tile the stream into shots at the given boundaries and aggregate attributes.

    Per shot: mean semantic vector, per-component lower-median shot-size vector
    (renormalized to sum 1), argmax size class, lower-median aesthetic score.
    The last shot's closing bound is the last timestamp plus one sample period.
    """
    n = len(stream)
    prev = 0
    for b in boundaries:
        if b <= prev or b >= n:
            raise ValueError(f"boundary {b} out of range or unsorted (stream of {n} frames)")
        prev = b

    mat = stream.semantic_matrix()
    sizes = np.array([f.shot_size for f in stream.frames], dtype=float)
    aes = np.array([f.aesthetic[0] for f in stream.frames], dtype=float)
    ts = np.array([f.timestamp_s for f in stream.frames], dtype=float)
    closing = ts[-1] + 1.0 / stream.fps_sampled

    starts = [0] + list(boundaries)
    ends = list(boundaries) + [n]
    shots = []
    for sid, (a, b) in enumerate(zip(starts, ends)):
        size_med = np.array([_lower_median(sizes[a:b, c]) for c in range(sizes.shape[1])])
        total = size_med.sum()
        if total <= 0:
            raise StreamFormatError(f"degenerate shot-size medians in shot {sid}")
        size_med /= total
        end_time = ts[b] if b < n else closing
        shots.append(
            Shot(
                shot_id=sid,
                start_frame=a,
                end_frame=b - 1,
                start_time_s=float(ts[a]),
                duration_s=float(end_time - ts[a]),
                semantic=tuple(float(x) for x in mat[a:b].mean(axis=0)),
                shot_size_class=int(np.argmax(size_med)),
                shot_size_vec=tuple(float(x) for x in size_med),
                aesthetic=_lower_median(aes[a:b]),
            )
        )
    return ShotList(
        source_id=stream.source_id,
        fps_sampled=stream.fps_sampled,
        dim_semantic=stream.dim_semantic,
        shots=tuple(shots),
    )


def segment_stream(stream: FeatureStream, threshold_k: float = DEFAULT_THRESHOLD_K) -> ShotList:
    """Detect boundaries and aggregate in one step."""
    return aggregate_shots(stream, detect_boundaries(stream, threshold_k))


_SHOTS_HEADER_KEYS = ("source_id", "fps_sampled", "dim_semantic", "shot_count")


def write_shots(shotlist: ShotList, path) -> None:
    header = {
        "source_id": shotlist.source_id,
        "fps_sampled": shotlist.fps_sampled,
        "dim_semantic": shotlist.dim_semantic,
        "shot_count": len(shotlist.shots),
    }
    header.update(shotlist.meta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, allow_nan=False) + "\n")
        for shot in shotlist.shots:
            fh.write(json.dumps(shot.as_dict(), allow_nan=False) + "\n")


def read_shots(path) -> ShotList:
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise StreamFormatError(f"{path}: empty file or missing header")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"{path}: malformed header: {exc}") from exc
        if not isinstance(header, dict) or any(k not in header for k in _SHOTS_HEADER_KEYS):
            raise StreamFormatError(f"{path}: header must be a JSON object with {_SHOTS_HEADER_KEYS}")
        shots = tuple(Shot.from_dict(json.loads(line)) for line in fh if line.strip())
    if int(header["shot_count"]) != len(shots):
        raise StreamFormatError(
            f"{path}: header declares {header['shot_count']} shots, file contains {len(shots)}"
        )
    meta = {k: v for k, v in header.items() if k not in _SHOTS_HEADER_KEYS}
    return ShotList(
        source_id=str(header["source_id"]),
        fps_sampled=float(header["fps_sampled"]),
        dim_semantic=int(header["dim_semantic"]),
        shots=shots,
        meta=meta,
    )
