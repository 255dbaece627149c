"""Style evaluation: shot-size transition-step histograms and RMS distances.

Editing tradition favors cuts about two size steps apart; the histogram of
absolute size-step magnitudes makes that measurable, and the RMS distance
between histograms compares an edit against a reference style.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCALE_3 = ("close-up", "medium", "long")
SCALE_6 = ("detail", "close-up", "medium-1", "medium-2", "long", "very-long")


@dataclass(frozen=True)
class SizeScale:
    """Ordered shot-size classes, tightest to widest."""

    classes: tuple[str, ...]

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValueError("a size scale needs at least 2 classes")

    @property
    def n(self) -> int:
        return len(self.classes)

    @classmethod
    def default(cls, n: int = 3) -> "SizeScale":
        if n == 3:
            return cls(SCALE_3)
        if n == 6:
            return cls(SCALE_6)
        raise ValueError(f"no built-in scale with {n} classes")


@dataclass(frozen=True)
class TransitionHistogram:
    """Normalized distribution of |size step| between consecutive shots."""

    bins: tuple[float, ...]
    total_transitions: int

    def validate(self) -> None:
        if self.total_transitions > 0 and abs(sum(self.bins) - 1.0) > 1e-9:
            raise ValueError("histogram bins must sum to 1")


def transition_histogram(size_sequence, scale: SizeScale) -> TransitionHistogram:
    """Count |s[t+1] - s[t]| into bins 0..n-1 and normalize."""
    seq = list(size_sequence)
    if len(seq) < 2:
        raise ValueError("need at least 2 shots to count transitions")
    for s in seq:
        if not 0 <= s < scale.n:
            raise ValueError(f"size class {s} out of range for {scale.n}-class scale")
    counts = np.zeros(scale.n)
    for a, b in zip(seq, seq[1:]):
        counts[abs(b - a)] += 1
    total = int(counts.sum())
    return TransitionHistogram(bins=tuple(counts / total), total_transitions=total)


def accumulate_histogram(size_sequences, scale: SizeScale) -> TransitionHistogram:
    """Pool transitions from several sequences into one normalized histogram."""
    counts = np.zeros(scale.n)
    total = 0
    for seq in size_sequences:
        seq = list(seq)
        if len(seq) < 2:
            continue
        for a, b in zip(seq, seq[1:]):
            if not 0 <= a < scale.n or not 0 <= b < scale.n:
                raise ValueError(f"size class out of range for {scale.n}-class scale")
            counts[abs(b - a)] += 1
            total += 1
    if total == 0:
        raise ValueError("no corpus yielded at least 2 consecutive shots")
    return TransitionHistogram(bins=tuple(counts / total), total_transitions=total)


def histogram_rms(h1: TransitionHistogram, h2: TransitionHistogram) -> float:
    """Root-mean-square of per-bin differences."""
    if len(h1.bins) != len(h2.bins):
        raise ValueError(f"bin counts differ: {len(h1.bins)} vs {len(h2.bins)}")
    diff = np.asarray(h1.bins) - np.asarray(h2.bins)
    return float(np.sqrt(np.mean(diff**2)))


def two_step_fraction(hist: TransitionHistogram) -> float:
    """Share of transitions exactly two size steps apart."""
    return hist.bins[2] if len(hist.bins) > 2 else 0.0


def style_report(reference_sequences, raw_sequences, edited_sequences, scale: SizeScale | None = None) -> dict:
    """Compare three corpora of shot-size sequences against the reference style.

    Returns histograms, pairwise RMS values, two-step-rule compliance, and the
    improvement ratio rms(ref, raw) / rms(ref, edited). A perfect edit makes
    the denominator zero; the ratio is then reported as null with a flag.
    """
    scale = scale or SizeScale.default(3)
    h_ref = accumulate_histogram(reference_sequences, scale)
    h_raw = accumulate_histogram(raw_sequences, scale)
    h_edit = accumulate_histogram(edited_sequences, scale)

    rms_ref_raw = histogram_rms(h_ref, h_raw)
    rms_ref_edit = histogram_rms(h_ref, h_edit)
    rms_raw_edit = histogram_rms(h_raw, h_edit)

    if rms_ref_edit > 0:
        ratio = rms_ref_raw / rms_ref_edit
        ratio_infinite = False
    else:
        ratio = None
        ratio_infinite = True

    return {
        "scale": list(scale.classes),
        "histograms": {
            "reference": list(h_ref.bins),
            "raw": list(h_raw.bins),
            "edited": list(h_edit.bins),
        },
        "transitions": {
            "reference": h_ref.total_transitions,
            "raw": h_raw.total_transitions,
            "edited": h_edit.total_transitions,
        },
        "rms": {
            "reference_vs_raw": rms_ref_raw,
            "reference_vs_edited": rms_ref_edit,
            "raw_vs_edited": rms_raw_edit,
        },
        "two_step_fraction": {
            "reference": two_step_fraction(h_ref),
            "raw": two_step_fraction(h_raw),
            "edited": two_step_fraction(h_edit),
        },
        "improvement_ratio": ratio,
        "improvement_ratio_infinite": ratio_infinite,
    }


def report_table(report: dict) -> str:
    """Tab-delimited rendering of a style report (one row per histogram bin)."""
    lines = ["corpus\t" + "\t".join(f"step_{k}" for k in range(len(report["scale"]))) + "\ttransitions"]
    for name in ("reference", "raw", "edited"):
        bins = "\t".join(f"{v:.6f}" for v in report["histograms"][name])
        lines.append(f"{name}\t{bins}\t{report['transitions'][name]}")
    lines.append("")
    lines.append("pair\trms")
    for pair, value in report["rms"].items():
        lines.append(f"{pair}\t{value:.6f}")
    ratio = report["improvement_ratio"]
    lines.append("")
    lines.append(f"improvement_ratio\t{'inf' if ratio is None else f'{ratio:.4f}'}")
    return "\n".join(lines) + "\n"
