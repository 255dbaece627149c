"""Training-corpus construction: duration labels, clip assembly, and augmentation.

Shots are labeled 1-4 by duration bucket or 5 for skip. A reference cut is the
expert signal; augmented variants insert foreign shots (label 5) and every shot
below the aesthetic threshold is relabeled 5, teaching the skip action.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from autocut.features import StreamFormatError
from autocut.segment import Shot, read_shots

SKIP_LABEL = 5
ACTION_LABELS = (1, 2, 3, 4, 5)

PROV_REFERENCE = "reference"
PROV_FOREIGN = "foreign"
PROV_LOW_AESTHETIC = "low_aesthetic"

DEFAULT_TARGET_SECONDS = 120.0
DEFAULT_N_VARIANTS = 40
DEFAULT_AESTHETIC_THRESHOLD = 0.1

# Cap on foreign insertions per variant, as a fraction of the clip length:
# variants must stay recognizably the reference cut.
MAX_INSERT_FRACTION = 0.3


def duration_to_label(duration_s: float) -> int:
    """Duration bucket: <1s -> 1, [1,3)s -> 2, [3,9)s -> 3, >=9s -> 4."""
    if not duration_s > 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    if duration_s < 1.0:
        return 1
    if duration_s < 3.0:
        return 2
    if duration_s < 9.0:
        return 3
    return 4


@dataclass(frozen=True)
class LabeledClip:
    """A shot sequence with per-shot action labels and provenance tags."""

    clip_id: str
    shots: tuple[Shot, ...]
    labels: tuple[int, ...]
    provenance: tuple[str, ...]

    def validate(self) -> None:
        if not (len(self.shots) == len(self.labels) == len(self.provenance) >= 1):
            raise ValueError(f"clip {self.clip_id}: shots/labels/provenance lengths differ or empty")
        for k, (label, prov) in enumerate(zip(self.labels, self.provenance)):
            if label not in ACTION_LABELS:
                raise ValueError(f"clip {self.clip_id}: bad label {label} at shot {k}")
            if prov in (PROV_FOREIGN, PROV_LOW_AESTHETIC) and label != SKIP_LABEL:
                raise ValueError(
                    f"clip {self.clip_id}: {prov} shot at {k} must have label {SKIP_LABEL}"
                )

    def semantic_matrix(self) -> np.ndarray:
        return np.array([s.semantic for s in self.shots], dtype=float)

    def __len__(self) -> int:
        return len(self.shots)


def assemble_clips(shots, target_s: float = DEFAULT_TARGET_SECONDS, clip_prefix: str = "clip") -> list[LabeledClip]:
    """Greedily pack consecutive shots into clips of roughly target_s seconds.

    A clip closes once its cumulative duration reaches target_s; every shot is
    labeled by its duration bucket and tagged as reference footage.
    """
    shots = list(shots)
    if not shots:
        raise ValueError("cannot assemble clips from an empty shot list")
    if not target_s > 0:
        raise ValueError("target_s must be positive")

    clips = []
    current: list[Shot] = []
    accum = 0.0
    for shot in shots:
        current.append(shot)
        accum += shot.duration_s
        if accum >= target_s:
            clips.append(current)
            current, accum = [], 0.0
    if current:
        clips.append(current)

    out = []
    for k, group in enumerate(clips):
        out.append(
            LabeledClip(
                clip_id=f"{clip_prefix}-{k:04d}",
                shots=tuple(group),
                labels=tuple(duration_to_label(s.duration_s) for s in group),
                provenance=tuple(PROV_REFERENCE for _ in group),
            )
        )
    return out


def apply_aesthetic_rule(clip: LabeledClip, threshold: float) -> LabeledClip:
    """Relabel every shot with aesthetic score below the threshold as a skip."""
    labels = list(clip.labels)
    prov = list(clip.provenance)
    for k, shot in enumerate(clip.shots):
        if shot.aesthetic < threshold:
            labels[k] = SKIP_LABEL
            prov[k] = PROV_LOW_AESTHETIC
    return LabeledClip(clip.clip_id, clip.shots, tuple(labels), tuple(prov))


def augment_clip(
    clip: LabeledClip,
    foreign_pool,
    n_variants: int = DEFAULT_N_VARIANTS,
    aesthetic_threshold: float = DEFAULT_AESTHETIC_THRESHOLD,
    seed: int = 0,
) -> list[LabeledClip]:
    """Produce variants with foreign shots inserted at random positions.

    Each variant draws m ~ uniform(1 .. max(1, ceil(0.3*len))) shots from the
    foreign pool (with replacement), inserts each at a uniformly random
    position (label 5, tagged foreign), then applies the aesthetic skip rule
    to every shot. Deterministic for a fixed seed.
    """
    foreign_pool = list(foreign_pool)
    if not foreign_pool:
        raise ValueError("foreign pool is empty")
    if n_variants < 1:
        raise ValueError("n_variants must be >= 1")
    clip.validate()

    rng = np.random.default_rng(seed)
    max_insert = max(1, math.ceil(MAX_INSERT_FRACTION * len(clip)))
    variants = []
    for v in range(n_variants):
        shots = list(clip.shots)
        labels = list(clip.labels)
        prov = list(clip.provenance)
        m = int(rng.integers(1, max_insert + 1))
        for _ in range(m):
            pos = int(rng.integers(0, len(shots) + 1))
            pick = foreign_pool[int(rng.integers(0, len(foreign_pool)))]
            shots.insert(pos, pick)
            labels.insert(pos, SKIP_LABEL)
            prov.insert(pos, PROV_FOREIGN)
        variant = LabeledClip(f"{clip.clip_id}-aug{v:02d}", tuple(shots), tuple(labels), tuple(prov))
        variants.append(apply_aesthetic_rule(variant, aesthetic_threshold))
    return variants


@dataclass
class CorpusConfig:
    target_seconds: float = DEFAULT_TARGET_SECONDS
    n_variants: int = DEFAULT_N_VARIANTS
    aesthetic_threshold: float = DEFAULT_AESTHETIC_THRESHOLD
    seed: int = 0

    def as_dict(self) -> dict:
        return {
            "target_seconds": self.target_seconds,
            "n_variants": self.n_variants,
            "aesthetic_threshold": self.aesthetic_threshold,
            "seed": self.seed,
        }


def build_corpus(reference_shot_files, config: CorpusConfig | None = None):
    """Assemble, augment and shuffle a labeled corpus from reference shot files.

    The foreign pool for each file is every shot from the other files, so at
    least two files are required. Originals are kept alongside their variants.
    Returns (clips, manifest); the shuffle and all augmentation draws derive
    from config.seed.
    """
    config = config or CorpusConfig()
    paths = list(reference_shot_files)
    if len(paths) < 2:
        raise ValueError("corpus construction needs >= 2 reference files (foreign pool)")

    shotlists = []
    for p in paths:
        sl = read_shots(p)
        if len(sl) == 0:
            raise StreamFormatError(f"{p}: contributes zero shots")
        shotlists.append(sl)

    rng = np.random.default_rng(config.seed)
    all_clips: list[LabeledClip] = []
    n_reference = 0
    per_file = []
    for idx, sl in enumerate(shotlists):
        pool = [s for j, other in enumerate(shotlists) if j != idx for s in other.shots]
        originals = assemble_clips(sl.shots, config.target_seconds, clip_prefix=sl.source_id)
        originals = [apply_aesthetic_rule(c, config.aesthetic_threshold) for c in originals]
        n_reference += len(originals)
        per_file.append({"source_id": sl.source_id, "n_shots": len(sl), "n_clips": len(originals)})
        for clip in originals:
            all_clips.append(clip)
            clip_seed = int(rng.integers(0, 2**32))
            all_clips.extend(
                augment_clip(clip, pool, config.n_variants, config.aesthetic_threshold, clip_seed)
            )

    order = rng.permutation(len(all_clips))
    shuffled = [all_clips[i] for i in order]

    label_counts = {str(lab): 0 for lab in ACTION_LABELS}
    for clip in shuffled:
        clip.validate()
        for lab in clip.labels:
            label_counts[str(lab)] += 1

    manifest = {
        "config": config.as_dict(),
        "seed": config.seed,
        "files": per_file,
        "n_reference_clips": n_reference,
        "n_variants_per_clip": config.n_variants,
        "n_clips_total": len(shuffled),
        "label_counts": label_counts,
    }
    return shuffled, manifest


def manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(json.dumps(manifest, sort_keys=True).encode("utf-8")).hexdigest()


def write_corpus(clips, manifest: dict, corpus_path, manifest_path=None) -> None:
    header = {"clip_count": len(clips), "manifest_sha256": manifest_hash(manifest)}
    with open(corpus_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, allow_nan=False) + "\n")
        for clip in clips:
            rec = {
                "clip_id": clip.clip_id,
                "labels": list(clip.labels),
                "provenance": list(clip.provenance),
                "shots": [s.as_dict() for s in clip.shots],
            }
            fh.write(json.dumps(rec, allow_nan=False) + "\n")
    if manifest_path is not None:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_corpus(path):
    """Returns (clips, header). Every clip is validated on read."""
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        clips = []
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            clip = LabeledClip(
                clip_id=str(obj["clip_id"]),
                shots=tuple(Shot.from_dict(s) for s in obj["shots"]),
                labels=tuple(int(x) for x in obj["labels"]),
                provenance=tuple(str(x) for x in obj["provenance"]),
            )
            clip.validate()
            clips.append(clip)
    if int(header.get("clip_count", len(clips))) != len(clips):
        raise StreamFormatError(f"{path}: clip count mismatch with header")
    return clips, header
