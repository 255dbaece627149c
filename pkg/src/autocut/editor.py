"""Applies a trained policy to footage: storyboard, cutlist, and command plan.

Included shots are trimmed from their start to the predicted duration bucket's
upper bound (1/3/9 seconds; label 4 keeps the full shot). The command plan is
a text file of media-tool invocations; nothing here executes it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from autocut.corpus import SKIP_LABEL
from autocut.policy import Policy, build_state, predict
from autocut.segment import ShotList

BUCKET_CAP_S = {1: 1.0, 2: 3.0, 3: 9.0, 4: math.inf}


@dataclass(frozen=True)
class StoryboardEntry:
    shot_id: int
    source_id: str
    in_time_s: float
    out_time_s: float
    predicted_label: int

    def as_dict(self) -> dict:
        return {
            "shot_id": self.shot_id,
            "source_id": self.source_id,
            "in_time_s": self.in_time_s,
            "out_time_s": self.out_time_s,
            "predicted_label": self.predicted_label,
        }


@dataclass(frozen=True)
class Storyboard:
    """Ordered kept segments plus the skipped shots; together they partition the input."""

    entries: tuple[StoryboardEntry, ...]
    skipped: tuple[dict, ...]
    source_id: str = ""

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def total_duration_s(self) -> float:
        return sum(e.out_time_s - e.in_time_s for e in self.entries)


def edit(shotlist: ShotList, policy: Policy) -> Storyboard:
    """Left-to-right pass: predict per shot, feeding predictions back as history."""
    if len(shotlist) == 0:
        raise ValueError("cannot edit an empty shot list")
    if not policy.is_fitted:
        raise ValueError("policy not fitted")

    sem = np.array([s.semantic for s in shotlist.shots], dtype=float)
    entries = []
    skipped = []
    history: list[int] = []
    for t, shot in enumerate(shotlist.shots):
        label = predict(policy, build_state(sem, t, history))
        history.append(label)
        if label == SKIP_LABEL:
            skipped.append({"shot_id": shot.shot_id, "predicted_label": label})
            continue
        keep = min(shot.duration_s, BUCKET_CAP_S[label])
        entries.append(
            StoryboardEntry(
                shot_id=shot.shot_id,
                source_id=shotlist.source_id,
                in_time_s=shot.start_time_s,
                out_time_s=shot.start_time_s + keep,
                predicted_label=label,
            )
        )
    return Storyboard(entries=tuple(entries), skipped=tuple(skipped), source_id=shotlist.source_id)


def emit_cutlist(storyboard: Storyboard, cutlist_path, plan_path=None) -> None:
    """Write the cutlist JSON and a command plan (one trim per entry + one concat).

    An all-skip storyboard is valid output: the cutlist carries a warning field
    and the plan is a no-op, so downstream automation can react.
    """
    obj = {
        "source_id": storyboard.source_id,
        "entries": [e.as_dict() for e in storyboard.entries],
        "skipped": list(storyboard.skipped),
    }
    if storyboard.is_empty:
        obj["warning"] = "empty_storyboard"
    with open(cutlist_path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, allow_nan=False, indent=2)
        fh.write("\n")

    if plan_path is None:
        return
    lines = ["#!/bin/sh", "# command plan emitted by autocut edit; review before running"]
    if storyboard.is_empty:
        lines.append("# empty storyboard: no segments selected, nothing to compose")
    else:
        names = []
        for k, e in enumerate(storyboard.entries):
            name = f"cut_{k:04d}.mp4"
            names.append(name)
            lines.append(
                f'ffmpeg -y -ss {e.in_time_s:.3f} -to {e.out_time_s:.3f} '
                f'-i "{e.source_id}" -c copy "{name}"'
            )
        listing = "".join(f"file '{n}'\\n" for n in names)
        lines.append(f'printf "{listing}" > concat_list.txt')
        lines.append('ffmpeg -y -f concat -safe 0 -i concat_list.txt -c copy "edited_output.mp4"')
    with open(plan_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_cutlist(path) -> Storyboard:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    entries = tuple(
        StoryboardEntry(
            shot_id=int(e["shot_id"]),
            source_id=str(e["source_id"]),
            in_time_s=float(e["in_time_s"]),
            out_time_s=float(e["out_time_s"]),
            predicted_label=int(e["predicted_label"]),
        )
        for e in obj["entries"]
    )
    return Storyboard(
        entries=entries,
        skipped=tuple(obj.get("skipped", [])),
        source_id=str(obj.get("source_id", "")),
    )
