import numpy as np
import pytest

from autocut.corpus import (
    PROV_FOREIGN,
    PROV_LOW_AESTHETIC,
    PROV_REFERENCE,
    SKIP_LABEL,
    CorpusConfig,
    LabeledClip,
    assemble_clips,
    augment_clip,
    build_corpus,
    duration_to_label,
    read_corpus,
    write_corpus,
)
from autocut.segment import Shot, ShotList, write_shots


def make_shot(sid, duration, aesthetic=0.8, size=1, sem_value=0.0, start=0.0):
    return Shot(
        shot_id=sid,
        start_frame=sid * 10,
        end_frame=sid * 10 + 9,
        start_time_s=start,
        duration_s=duration,
        semantic=tuple([sem_value] * 64),
        shot_size_class=size,
        shot_size_vec=(0.05, 0.9, 0.05) if size == 1 else (0.9, 0.05, 0.05),
        aesthetic=aesthetic,
    )


def shots_of_durations(durations, aesthetic=0.8):
    return [make_shot(i, d, aesthetic) for i, d in enumerate(durations)]


@pytest.mark.parametrize(
    "duration,label",
    [(0.5, 1), (0.99, 1), (1.0, 2), (2.0, 2), (2.999, 2), (3.0, 3), (5.0, 3), (8.999, 3),
     (9.0, 4), (12.0, 4), (300.0, 4)],
)
def test_duration_buckets(duration, label):
    assert duration_to_label(duration) == label


def test_nonpositive_duration_rejected():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            duration_to_label(bad)


def test_assemble_greedy_packing():
    clips = assemble_clips(shots_of_durations([30.0] * 10), target_s=120.0)
    assert [len(c) for c in clips] == [4, 4, 2]
    for clip in clips:
        assert all(p == PROV_REFERENCE for p in clip.provenance)
        assert all(duration_to_label(s.duration_s) == l for s, l in zip(clip.shots, clip.labels))


def test_assemble_single_long_shot():
    clips = assemble_clips(shots_of_durations([300.0]), target_s=120.0)
    assert len(clips) == 1 and len(clips[0]) == 1
    assert clips[0].labels == (4,)


def test_assemble_short_footage_single_clip():
    clips = assemble_clips(shots_of_durations([5.0, 5.0, 5.0]), target_s=120.0)
    assert len(clips) == 1 and len(clips[0]) == 3


def test_assemble_empty_rejected():
    with pytest.raises(ValueError):
        assemble_clips([], target_s=120.0)


def base_clip(n=6):
    shots = shots_of_durations([2.0] * n)
    return LabeledClip(
        clip_id="c",
        shots=tuple(shots),
        labels=tuple(duration_to_label(s.duration_s) for s in shots),
        provenance=tuple(PROV_REFERENCE for _ in shots),
    )


def test_augment_inserts_labeled_foreign_shots():
    clip = base_clip(6)
    pool = [make_shot(99, 4.0, sem_value=7.0)]
    variants = augment_clip(clip, pool, n_variants=5, seed=3)
    for v in variants:
        n_foreign = sum(1 for p in v.provenance if p == PROV_FOREIGN)
        assert 1 <= n_foreign <= 2  # ceil(0.3 * 6) = 2
        assert len(v) == len(clip) + n_foreign
        for lab, prov in zip(v.labels, v.provenance):
            if prov == PROV_FOREIGN:
                assert lab == SKIP_LABEL


def test_augment_relabels_low_aesthetic():
    shots = shots_of_durations([2.0, 2.0, 2.0])
    shots[1] = make_shot(1, 2.0, aesthetic=0.05)
    clip = LabeledClip("c", tuple(shots), (2, 2, 2), (PROV_REFERENCE,) * 3)
    variants = augment_clip(clip, [make_shot(9, 1.5)], n_variants=1, aesthetic_threshold=0.1, seed=0)
    v = variants[0]
    k = [i for i, s in enumerate(v.shots) if s.aesthetic == 0.05]
    assert len(k) == 1
    assert v.labels[k[0]] == SKIP_LABEL
    assert v.provenance[k[0]] == PROV_LOW_AESTHETIC


def test_augment_preserves_original_order():
    clip = base_clip(8)
    pool = [make_shot(99, 4.0, sem_value=7.0)]
    for v in augment_clip(clip, pool, n_variants=10, seed=1):
        originals = [s.shot_id for s, p in zip(v.shots, v.provenance) if p != PROV_FOREIGN]
        assert originals == [s.shot_id for s in clip.shots]


def test_augment_deterministic():
    clip = base_clip(5)
    pool = [make_shot(90 + i, 3.0, sem_value=float(i)) for i in range(4)]
    a = augment_clip(clip, pool, n_variants=7, seed=42)
    b = augment_clip(clip, pool, n_variants=7, seed=42)
    assert a == b
    c = augment_clip(clip, pool, n_variants=7, seed=43)
    assert a != c


def test_augment_empty_pool_rejected():
    with pytest.raises(ValueError, match="pool"):
        augment_clip(base_clip(), [], n_variants=1, seed=0)


def test_clip_invariant_violations_rejected():
    shots = tuple(shots_of_durations([2.0, 2.0]))
    with pytest.raises(ValueError, match="label"):
        LabeledClip("c", shots, (2, 9), (PROV_REFERENCE,) * 2).validate()
    with pytest.raises(ValueError, match="must have label"):
        LabeledClip("c", shots, (2, 2), (PROV_REFERENCE, PROV_FOREIGN)).validate()
    with pytest.raises(ValueError, match="must have label"):
        LabeledClip("c", shots, (2, 2), (PROV_REFERENCE, PROV_LOW_AESTHETIC)).validate()


def _write_reference_files(tmp_path, n_files=2, shots_per_file=12, aesthetics=0.8):
    paths = []
    for f in range(n_files):
        shots = [make_shot(i, 2.0 + (i % 3), aesthetics, sem_value=float(f)) for i in range(shots_per_file)]
        sl = ShotList(source_id=f"film{f}", fps_sampled=2.0, dim_semantic=64, shots=tuple(shots))
        p = tmp_path / f"film{f}.shots.jsonl"
        write_shots(sl, p)
        paths.append(p)
    return paths


def test_build_corpus_counts(tmp_path):
    paths = _write_reference_files(tmp_path, n_files=2, shots_per_file=12)
    config = CorpusConfig(target_seconds=40.0, n_variants=40, seed=7)
    clips, manifest = build_corpus(paths, config)
    assert manifest["n_clips_total"] == len(clips)
    assert len(clips) == manifest["n_reference_clips"] * (1 + 40)
    for clip in clips:
        clip.validate()


def test_build_corpus_single_file_rejected(tmp_path):
    paths = _write_reference_files(tmp_path, n_files=1)
    with pytest.raises(ValueError, match="2 reference files"):
        build_corpus(paths, CorpusConfig())


def test_build_corpus_zero_shot_file_rejected(tmp_path):
    paths = _write_reference_files(tmp_path, n_files=2)
    empty = ShotList(source_id="empty", fps_sampled=2.0, dim_semantic=64, shots=())
    p = tmp_path / "empty.shots.jsonl"
    write_shots(empty, p)
    with pytest.raises(Exception, match="zero shots"):
        build_corpus(paths + [p], CorpusConfig())


def test_build_corpus_label5_rules_exhaustive(tmp_path):
    # Every foreign or low-aesthetic shot labeled 5; every reference shot
    # labeled by its duration bucket; scanned over the whole corpus.
    paths = _write_reference_files(tmp_path, n_files=3, shots_per_file=10)
    low = [make_shot(i, 2.0, aesthetic=0.02 if i % 4 == 0 else 0.8) for i in range(10)]
    sl = ShotList(source_id="film-lowaes", fps_sampled=2.0, dim_semantic=64, shots=tuple(low))
    extra = tmp_path / "low.shots.jsonl"
    write_shots(sl, extra)
    clips, _ = build_corpus(paths + [extra], CorpusConfig(target_seconds=30.0, n_variants=5, seed=1))
    assert any(PROV_FOREIGN in c.provenance for c in clips)
    assert any(PROV_LOW_AESTHETIC in c.provenance for c in clips)
    for clip in clips:
        for shot, label, prov in zip(clip.shots, clip.labels, clip.provenance):
            if prov in (PROV_FOREIGN, PROV_LOW_AESTHETIC):
                assert label == SKIP_LABEL
            else:
                assert prov == PROV_REFERENCE
                assert label == duration_to_label(shot.duration_s)
                assert shot.aesthetic >= 0.1


def test_build_corpus_deterministic_bytes(tmp_path):
    paths = _write_reference_files(tmp_path, n_files=2)
    config = CorpusConfig(target_seconds=30.0, n_variants=6, seed=9)
    for run in ("a", "b"):
        clips, manifest = build_corpus(paths, config)
        write_corpus(clips, manifest, tmp_path / f"{run}.corpus.jsonl", tmp_path / f"{run}.manifest.json")
    assert (tmp_path / "a.corpus.jsonl").read_bytes() == (tmp_path / "b.corpus.jsonl").read_bytes()
    assert (tmp_path / "a.manifest.json").read_bytes() == (tmp_path / "b.manifest.json").read_bytes()


def test_corpus_roundtrip(tmp_path):
    paths = _write_reference_files(tmp_path, n_files=2)
    clips, manifest = build_corpus(paths, CorpusConfig(target_seconds=30.0, n_variants=3, seed=2))
    corpus_path = tmp_path / "c.corpus.jsonl"
    write_corpus(clips, manifest, corpus_path, tmp_path / "c.manifest.json")
    loaded, header = read_corpus(corpus_path)
    assert loaded == clips
    assert header["clip_count"] == len(clips)
