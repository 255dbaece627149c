"""Video -> .feat.jsonl extraction pipeline.

Samples frames at a fixed rate, preprocesses (downscale to 227x227, mean color
subtraction), runs the three backends in batches, and writes the stream
atomically (temp file + rename): a failed extraction leaves nothing behind.

The output format is the primary pipeline's contract; this module never
imports the primary package, it writes the documented format directly.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import cv2
import numpy as np
import torch

from autocut_extract.backends import AestheticBackend, SemanticBackend, ShotSizeBackend

INPUT_SIZE = 227
# Mean color values on ImageNet-scale RGB (0-255).
MEAN_RGB = np.array([123.68, 116.779, 103.939], dtype=np.float32)


@dataclass
class ExtractorConfig:
    fps_sample: float = 2.0
    semantic: str = "untrained-seeded"
    aesthetic: str = "proxy"
    shot_size: str = "proxy-uniform"
    device: str = "cpu"
    batch_size: int = 8
    deterministic: bool = True

    def __post_init__(self):
        if not self.fps_sample > 0:
            raise ValueError("fps_sample must be > 0")


def _preprocess(frames_bgr) -> torch.Tensor:
    batch = np.empty((len(frames_bgr), 3, INPUT_SIZE, INPUT_SIZE), dtype=np.float32)
    for i, frame in enumerate(frames_bgr):
        resized = cv2.resize(frame, (INPUT_SIZE, INPUT_SIZE), interpolation=cv2.INTER_AREA)
        rgb = cv2.cvtColor(resized, cv2.COLOR_BGR2RGB).astype(np.float32)
        batch[i] = (rgb - MEAN_RGB).transpose(2, 0, 1)
    return torch.from_numpy(batch)


def _sample_frames(video_path, fps_sample: float):
    """Yields (timestamp_s, frame) pairs decimated to roughly fps_sample."""
    cap = cv2.VideoCapture(str(video_path))
    if not cap.isOpened():
        raise ValueError(f"cannot decode video: {video_path}")
    src_fps = cap.get(cv2.CAP_PROP_FPS)
    if not src_fps or src_fps <= 0 or math.isnan(src_fps):
        src_fps = 25.0  # container did not declare a rate
    step = src_fps / fps_sample
    sampled = []
    index = 0
    next_pick = 0.0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        if index >= next_pick:
            sampled.append((index / src_fps, frame))
            next_pick += step
        index += 1
    cap.release()
    if index == 0:
        raise ValueError(f"video contains no decodable frames: {video_path}")
    return sampled


def extract(video_path, config: ExtractorConfig | None = None, out_path=None) -> str:
    """Extract features from a video into a .feat.jsonl stream file.

    Returns the output path. The file appears only on success.
    """
    config = config or ExtractorConfig()
    if out_path is None:
        out_path = os.path.splitext(str(video_path))[0] + ".feat.jsonl"

    if config.deterministic:
        torch.set_num_threads(1)
    torch.manual_seed(0)

    semantic = SemanticBackend(config.semantic)
    aesthetic = AestheticBackend(config.aesthetic)
    shot_size = ShotSizeBackend(config.shot_size)

    sampled = _sample_frames(video_path, config.fps_sample)
    sem_rows, aes_rows, size_rows = [], [], []
    for lo in range(0, len(sampled), config.batch_size):
        chunk = [f for _, f in sampled[lo : lo + config.batch_size]]
        batch = _preprocess(chunk)
        sem_rows.append(semantic(batch))
        aes_rows.append(aesthetic(batch))
        size_rows.append(shot_size(batch))
    sem = np.vstack(sem_rows)
    aes = np.clip(np.vstack(aes_rows), 0.0, 1.0)
    sizes = np.vstack(size_rows)
    sizes = sizes / sizes.sum(axis=1, keepdims=True)

    warnings = [w for w in (semantic.warning, aesthetic.warning, shot_size.warning) if w]
    header = {
        "source_id": os.path.basename(str(video_path)),
        "fps_sampled": config.fps_sample,
        "dim_semantic": sem.shape[1],
        "frame_count": len(sampled),
        "extractor_backends": {
            "semantic": semantic.identifier,
            "aesthetic": aesthetic.identifier,
            "shot_size": shot_size.identifier,
        },
    }
    if warnings:
        header["extractor_warnings"] = warnings

    tmp_path = str(out_path) + ".tmp"
    try:
        with open(tmp_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, allow_nan=False) + "\n")
            for i, (ts, _) in enumerate(sampled):
                rec = {
                    "frame_index": i,
                    "timestamp_s": ts,
                    "semantic": [float(x) for x in sem[i]],
                    "aesthetic": [float(x) for x in aes[i]],
                    "shot_size": [float(x) for x in sizes[i]],
                }
                fh.write(json.dumps(rec, allow_nan=False) + "\n")
        os.replace(tmp_path, out_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return str(out_path)
