"""Data-driven automatic video editing: learn a cutting style, apply it to new footage."""

from autocut.features import FrameFeature, FeatureStream, read_stream, write_stream, synth_stream
from autocut.segment import Shot, ShotList, detect_boundaries, aggregate_shots, segment_stream
from autocut.corpus import LabeledClip, duration_to_label, assemble_clips, augment_clip, build_corpus
from autocut.policy import Policy, AggregatedDataset, build_state, predict, train_csc, dagger_train, hamming_loss
from autocut.editor import Storyboard, StoryboardEntry, edit, emit_cutlist, read_cutlist
from autocut.evaluate import SizeScale, TransitionHistogram, transition_histogram, histogram_rms, style_report

__version__ = "0.1.0"
