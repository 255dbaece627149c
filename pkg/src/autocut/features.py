"""Frame-feature data model and the .feat.jsonl stream format.

A feature stream is one header line (JSON object) followed by one JSON
object per sampled frame. All numeric payloads must be finite; floats
survive a write/read roundtrip bit-exactly via shortest-repr printing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

VALID_SEMANTIC_DIMS = (1024, 64)
SHOT_SIZE_CLASSES = 3
_SHOT_SIZE_SUM_TOL = 1e-6

# Separation between consecutive synthetic segment centers, in units of
# the larger of the two noise scales.
SYNTH_SEPARATION_FACTOR = 10.0


class StreamFormatError(ValueError):
    """A feature stream file or in-memory stream violates the format contract."""


def _check_finite(values, what: str, frame_index) -> None:
    for v in values:
        if not math.isfinite(v):
            raise StreamFormatError(f"non-finite value in {what} at frame {frame_index}")


@dataclass(frozen=True)
class FrameFeature:
    """One sampled frame: semantic embedding, aesthetic pair, shot-size distribution."""

    frame_index: int
    timestamp_s: float
    semantic: tuple[float, ...]
    aesthetic: tuple[float, float]
    shot_size: tuple[float, float, float]

    def validate(self) -> None:
        i = self.frame_index
        if i < 0:
            raise StreamFormatError(f"negative frame_index {i}")
        if not math.isfinite(self.timestamp_s) or self.timestamp_s < 0:
            raise StreamFormatError(f"bad timestamp at frame {i}")
        _check_finite(self.semantic, "semantic", i)
        if len(self.aesthetic) != 2:
            raise StreamFormatError(f"aesthetic must have length 2 at frame {i}")
        _check_finite(self.aesthetic, "aesthetic", i)
        for a in self.aesthetic:
            if not 0.0 <= a <= 1.0:
                raise StreamFormatError(f"aesthetic component outside [0,1] at frame {i}")
        if len(self.shot_size) != SHOT_SIZE_CLASSES:
            raise StreamFormatError(f"shot_size must have length {SHOT_SIZE_CLASSES} at frame {i}")
        _check_finite(self.shot_size, "shot_size", i)
        if any(c < 0 for c in self.shot_size):
            raise StreamFormatError(f"negative shot_size component at frame {i}")
        if abs(sum(self.shot_size) - 1.0) > _SHOT_SIZE_SUM_TOL:
            raise StreamFormatError(f"shot_size does not sum to 1 at frame {i}")


@dataclass(frozen=True)
class FeatureStream:
    """An ordered run of FrameFeatures from one source.

    Frame indices are positional (0..n-1) so that boundary indices returned
    by segmentation are unambiguous. `meta` carries any extra header fields
    (e.g. backend warning flags from an extractor) and roundtrips verbatim.
    """

    source_id: str
    fps_sampled: float
    dim_semantic: int
    frames: tuple[FrameFeature, ...]
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.frames:
            raise StreamFormatError("stream has no frames")
        if not (math.isfinite(self.fps_sampled) and self.fps_sampled > 0):
            raise StreamFormatError("fps_sampled must be > 0")
        if self.dim_semantic not in VALID_SEMANTIC_DIMS:
            raise StreamFormatError(
                f"dim_semantic must be one of {VALID_SEMANTIC_DIMS}, got {self.dim_semantic}"
            )
        prev_ts = -math.inf
        for pos, frame in enumerate(self.frames):
            frame.validate()
            if frame.frame_index != pos:
                raise StreamFormatError(
                    f"frame_index {frame.frame_index} at position {pos}: indices must be 0..n-1"
                )
            if len(frame.semantic) != self.dim_semantic:
                raise StreamFormatError(
                    f"semantic length {len(frame.semantic)} != dim_semantic "
                    f"{self.dim_semantic} at frame {pos}"
                )
            if frame.timestamp_s <= prev_ts:
                raise StreamFormatError(f"non-monotone timestamp at frame {pos}")
            prev_ts = frame.timestamp_s

    def semantic_matrix(self) -> np.ndarray:
        """Frame semantics stacked as an (n_frames, dim_semantic) float array."""
        return np.array([f.semantic for f in self.frames], dtype=float)

    def __len__(self) -> int:
        return len(self.frames)


def _reject_constant(name):
    raise StreamFormatError(f"non-finite JSON constant {name!r} in stream file")


def _frame_from_obj(obj: dict, pos: int) -> FrameFeature:
    try:
        return FrameFeature(
            frame_index=int(obj["frame_index"]),
            timestamp_s=float(obj["timestamp_s"]),
            semantic=tuple(float(x) for x in obj["semantic"]),
            aesthetic=tuple(float(x) for x in obj["aesthetic"]),
            shot_size=tuple(float(x) for x in obj["shot_size"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StreamFormatError(f"malformed frame record at frame {pos}: {exc}") from exc


_HEADER_KEYS = ("source_id", "fps_sampled", "dim_semantic", "frame_count")


def read_stream(path) -> FeatureStream:
    """Read and validate a .feat.jsonl file. Raises StreamFormatError naming the offending frame."""
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise StreamFormatError(f"{path}: empty file or missing header")
        try:
            header = json.loads(header_line, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"{path}: malformed header: {exc}") from exc
        if not isinstance(header, dict) or any(k not in header for k in _HEADER_KEYS):
            raise StreamFormatError(f"{path}: header must be a JSON object with {_HEADER_KEYS}")

        frames = []
        for pos, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                obj = json.loads(line, parse_constant=_reject_constant)
            except json.JSONDecodeError as exc:
                raise StreamFormatError(f"{path}: malformed frame record at frame {pos}: {exc}") from exc
            frames.append(_frame_from_obj(obj, pos))

    declared = int(header["frame_count"])
    if declared != len(frames):
        raise StreamFormatError(
            f"{path}: header declares {declared} frames, file contains {len(frames)}"
        )
    meta = {k: v for k, v in header.items() if k not in _HEADER_KEYS}
    stream = FeatureStream(
        source_id=str(header["source_id"]),
        fps_sampled=float(header["fps_sampled"]),
        dim_semantic=int(header["dim_semantic"]),
        frames=tuple(frames),
        meta=meta,
    )
    stream.validate()
    return stream


def write_stream(stream: FeatureStream, path) -> None:
    """Validate and write a stream; read_stream(write_stream(s)) == s for finite values."""
    stream.validate()
    header = {
        "source_id": stream.source_id,
        "fps_sampled": stream.fps_sampled,
        "dim_semantic": stream.dim_semantic,
        "frame_count": len(stream.frames),
    }
    clash = set(stream.meta) & set(header)
    if clash:
        raise StreamFormatError(f"meta keys collide with header fields: {sorted(clash)}")
    header.update(stream.meta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, allow_nan=False) + "\n")
        for f in stream.frames:
            rec = {
                "frame_index": f.frame_index,
                "timestamp_s": f.timestamp_s,
                "semantic": list(f.semantic),
                "aesthetic": list(f.aesthetic),
                "shot_size": list(f.shot_size),
            }
            fh.write(json.dumps(rec, allow_nan=False) + "\n")


def _shot_size_vec(size_class: int) -> tuple[float, float, float]:
    if not 0 <= size_class < SHOT_SIZE_CLASSES:
        raise ValueError(f"size_class must be in 0..{SHOT_SIZE_CLASSES - 1}, got {size_class}")
    vec = [0.05, 0.05, 0.05]
    vec[size_class] = 0.9
    return tuple(vec)


def synth_stream(scenario: dict, seed: int) -> FeatureStream:
    """Generate a deterministic synthetic stream from a scenario description.

    The scenario is a dict with a `segments` list; each segment gives
    `center` (semantic vector), `frames` (count), `noise` (scale), `aesthetic`
    (level in [0,1]) and `size_class` (0..2). Per-frame semantic vectors are
    the center plus noise whose Euclidean norm is bounded by the segment's
    noise scale, so consecutive segments with centers separated by >= 10x the
    noise scale produce detectable boundaries. Pure function of (scenario, seed).
    """
    segments = scenario.get("segments")
    if not segments:
        raise ValueError("scenario must list at least 1 segment")
    fps = float(scenario.get("fps_sampled", 2.0))
    source_id = str(scenario.get("source_id", "synth"))

    centers = [np.asarray(seg["center"], dtype=float) for seg in segments]
    dim = centers[0].shape[0]
    for k, c in enumerate(centers):
        if c.shape != (dim,):
            raise ValueError(f"segment {k} center has dim {c.shape[0]}, expected {dim}")
    for k, seg in enumerate(segments):
        if int(seg["frames"]) < 1:
            raise ValueError(f"segment {k} has zero frames")
    # Boundary planting guarantee: adjacent centers must be well separated
    # relative to the larger of the two noise scales.
    for k in range(1, len(segments)):
        gap = float(np.linalg.norm(centers[k] - centers[k - 1]))
        noise = max(float(segments[k]["noise"]), float(segments[k - 1]["noise"]))
        if gap < SYNTH_SEPARATION_FACTOR * noise or gap == 0.0:
            raise ValueError(
                f"segments {k - 1} and {k}: center separation {gap:.4g} below "
                f"{SYNTH_SEPARATION_FACTOR}x noise scale {noise:.4g}"
            )

    rng = np.random.default_rng(seed)
    frames = []
    idx = 0
    for seg, center in zip(segments, centers):
        n = int(seg["frames"])
        noise = float(seg["noise"])
        level = float(seg["aesthetic"])
        size_vec = _shot_size_vec(int(seg["size_class"]))
        # Uniform per-component noise scaled so the noise vector norm <= `noise`.
        half_width = noise / math.sqrt(dim) if noise > 0 else 0.0
        for _ in range(n):
            vec = center if half_width == 0.0 else center + rng.uniform(-half_width, half_width, dim)
            frames.append(
                FrameFeature(
                    frame_index=idx,
                    timestamp_s=idx / fps,
                    semantic=tuple(float(x) for x in vec),
                    aesthetic=(level, 1.0 - level),
                    shot_size=size_vec,
                )
            )
            idx += 1

    stream = FeatureStream(
        source_id=source_id,
        fps_sampled=fps,
        dim_semantic=dim,
        frames=tuple(frames),
    )
    stream.validate()
    return stream
