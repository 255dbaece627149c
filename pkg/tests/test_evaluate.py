import itertools

import numpy as np
import pytest

from autocut.evaluate import (
    SizeScale,
    TransitionHistogram,
    accumulate_histogram,
    histogram_rms,
    report_table,
    style_report,
    transition_histogram,
    two_step_fraction,
)

S3 = SizeScale.default(3)
S6 = SizeScale.default(6)


def test_all_two_step_transitions():
    h = transition_histogram([0, 2, 0, 2], S3)
    assert h.bins == (0.0, 0.0, 1.0)
    assert h.total_transitions == 3


def test_constant_sequence():
    h = transition_histogram([1, 1, 1], S3)
    assert h.bins == (1.0, 0.0, 0.0)


def test_uniform_sequence_matches_enumeration():
    # Oracle: enumerate the 9 equiprobable ordered pairs over 3 classes.
    pairs = list(itertools.product(range(3), repeat=2))
    expected = np.zeros(3)
    for a, b in pairs:
        expected[abs(b - a)] += 1 / len(pairs)
    assert np.allclose(expected, [1 / 3, 4 / 9, 2 / 9])

    rng = np.random.default_rng(0)
    seq = rng.integers(0, 3, 10_001)
    h = transition_histogram(list(seq), S3)
    assert np.allclose(h.bins, expected, atol=0.02)


def test_six_class_scale():
    h = transition_histogram([0, 5, 0], S6)
    assert h.bins[5] == 1.0
    with pytest.raises(ValueError, match="out of range"):
        transition_histogram([0, 6], S6)


def test_short_sequence_rejected():
    with pytest.raises(ValueError, match="at least 2"):
        transition_histogram([1], S3)


def test_histogram_normalized():
    rng = np.random.default_rng(1)
    for _ in range(20):
        seq = list(rng.integers(0, 3, rng.integers(2, 50)))
        h = transition_histogram(seq, S3)
        h.validate()
        assert sum(h.bins) == pytest.approx(1.0, abs=1e-9)


def test_reversal_invariance():
    rng = np.random.default_rng(2)
    for _ in range(20):
        seq = list(rng.integers(0, 3, 40))
        assert transition_histogram(seq, S3) == transition_histogram(seq[::-1], S3)


def test_rms_identical_is_zero():
    h = transition_histogram([0, 1, 2, 0], S3)
    assert histogram_rms(h, h) == 0.0


def test_rms_unit_vectors():
    h1 = TransitionHistogram((1.0, 0.0, 0.0), 10)
    h2 = TransitionHistogram((0.0, 1.0, 0.0), 10)
    assert histogram_rms(h1, h2) == pytest.approx(np.sqrt(2 / 3))


def test_rms_bin_count_mismatch():
    h1 = TransitionHistogram((1.0, 0.0, 0.0), 10)
    h2 = TransitionHistogram((1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 10)
    with pytest.raises(ValueError, match="bin counts"):
        histogram_rms(h1, h2)


def test_rms_metric_properties():
    # Symmetry, identity of indiscernibles, triangle inequality on random
    # normalized histograms.
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b, c = (rng.dirichlet(np.ones(3)) for _ in range(3))
        ha = TransitionHistogram(tuple(a), 5)
        hb = TransitionHistogram(tuple(b), 5)
        hc = TransitionHistogram(tuple(c), 5)
        assert histogram_rms(ha, hb) == pytest.approx(histogram_rms(hb, ha))
        assert histogram_rms(ha, ha) == 0.0
        if not np.allclose(a, b):
            assert histogram_rms(ha, hb) > 0
        assert histogram_rms(ha, hc) <= histogram_rms(ha, hb) + histogram_rms(hb, hc) + 1e-12


def test_accumulate_pools_transitions():
    h = accumulate_histogram([[0, 2], [0, 2, 0]], S3)
    assert h.total_transitions == 3
    assert h.bins == (0.0, 0.0, 1.0)
    with pytest.raises(ValueError, match="at least 2"):
        accumulate_histogram([[1], [2]], S3)


def test_style_report_identical_edit_flags_infinite_ratio():
    ref = [[0, 2, 0, 2, 0]]
    raw = [[0, 1, 2, 1, 0]]
    report = style_report(ref, raw, ref)
    assert report["improvement_ratio"] is None
    assert report["improvement_ratio_infinite"]


def test_style_report_raw_equals_edited_gives_ratio_one():
    ref = [[0, 2, 0, 2, 0]]
    raw = [[0, 1, 2, 1, 0]]
    report = style_report(ref, raw, raw)
    assert report["improvement_ratio"] == pytest.approx(1.0)
    assert not report["improvement_ratio_infinite"]


def test_style_report_contents():
    rng = np.random.default_rng(4)
    ref = [list(rng.integers(0, 3, 30)) for _ in range(5)]
    raw = [list(rng.integers(0, 3, 30)) for _ in range(5)]
    edited = [list(rng.integers(0, 3, 20)) for _ in range(5)]
    report = style_report(ref, raw, edited)
    assert report["transitions"]["reference"] == 5 * 29
    assert report["transitions"]["edited"] == 5 * 19
    for bins in report["histograms"].values():
        assert sum(bins) == pytest.approx(1.0)
    assert report["two_step_fraction"]["reference"] == report["histograms"]["reference"][2]
    table = report_table(report)
    assert "reference\t" in table and "improvement_ratio" in table


def test_two_step_fraction():
    h = transition_histogram([0, 2, 0, 1, 1], S3)
    # transitions: |2|,|2|,|1|,|0| -> bin2 share = 0.5
    assert two_step_fraction(h) == pytest.approx(0.5)
