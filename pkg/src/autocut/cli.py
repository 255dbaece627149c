"""Command-line pipeline: synth | segment | pca-fit | build-corpus | train | edit | eval.

Every stage is deterministic under a fixed seed and writes a sidecar manifest
echoing its resolved configuration, so any output can be reproduced from its
manifest alone. Config precedence: flags > config file > defaults; the
AUTOCUT_SEED environment variable is the seed fallback of last resort.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from autocut import corpus as corpus_mod
from autocut import editor as editor_mod
from autocut import evaluate as evaluate_mod
from autocut import features as features_mod
from autocut import pca as pca_mod
from autocut import policy as policy_mod
from autocut import segment as segment_mod


def _fail(stage: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": message, "stage": stage}) + "\n")
    return 1


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path, stage: str, config: dict, inputs, outputs) -> None:
    manifest = {
        "stage": stage,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
    }
    with open(str(out_path) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


class _Config:
    """Resolves option values: explicit flag > config-file entry > default."""

    def __init__(self, path=None):
        self.data = {}
        if path:
            with open(path, "r", encoding="utf-8") as fh:
                self.data = json.load(fh)

    def resolve(self, stage: str, key: str, flag_value, default):
        if flag_value is not None:
            return flag_value
        stage_cfg = self.data.get(stage, {})
        if key in stage_cfg:
            return stage_cfg[key]
        return default

    def resolve_seed(self, stage: str, flag_value):
        if flag_value is not None:
            return flag_value
        stage_cfg = self.data.get(stage, {})
        if "seed" in stage_cfg:
            return int(stage_cfg["seed"])
        env = os.environ.get("AUTOCUT_SEED")
        if env is not None:
            return int(env)
        return 0


def _cmd_synth(args, cfg: _Config) -> int:
    seed = cfg.resolve_seed("synth", args.seed)
    with open(args.spec, "r", encoding="utf-8") as fh:
        scenario = json.load(fh)
    stream = features_mod.synth_stream(scenario, seed)
    features_mod.write_stream(stream, args.out)
    _write_manifest(args.out, "synth", {"seed": seed, "spec": str(args.spec)}, [args.spec], [args.out])
    return 0


def _cmd_segment(args, cfg: _Config) -> int:
    threshold_k = float(cfg.resolve("segment", "threshold_k", args.threshold_k, segment_mod.DEFAULT_THRESHOLD_K))
    pca_path = cfg.resolve("segment", "pca", args.pca, None)
    stream = features_mod.read_stream(args.input)
    if pca_path:
        model = pca_mod.IncrementalPca.load(pca_path)
        stream = pca_mod.reduce_stream(stream, model)
    shotlist = segment_mod.segment_stream(stream, threshold_k)
    segment_mod.write_shots(shotlist, args.out)
    inputs = [args.input] + ([pca_path] if pca_path else [])
    _write_manifest(args.out, "segment", {"threshold_k": threshold_k, "pca": pca_path}, inputs, [args.out])
    return 0


def _cmd_pca_fit(args, cfg: _Config) -> int:
    batch_size = int(cfg.resolve("pca-fit", "batch_size", args.batch_size, pca_mod.DEFAULT_BATCH_SIZE))
    n_components = int(cfg.resolve("pca-fit", "n_components", args.n_components, pca_mod.DEFAULT_N_COMPONENTS))
    model = pca_mod.IncrementalPca(n_components=n_components)
    for path in args.inputs:
        mat = features_mod.read_stream(path).semantic_matrix()
        for lo in range(0, mat.shape[0], batch_size):
            model.partial_fit(mat[lo : lo + batch_size])
    model.save(args.out)
    _write_manifest(
        args.out,
        "pca-fit",
        {"batch_size": batch_size, "n_components": n_components},
        args.inputs,
        [args.out],
    )
    return 0


def _cmd_build_corpus(args, cfg: _Config) -> int:
    config = corpus_mod.CorpusConfig(
        target_seconds=float(cfg.resolve("build-corpus", "target_seconds", args.target_seconds,
                                         corpus_mod.DEFAULT_TARGET_SECONDS)),
        n_variants=int(cfg.resolve("build-corpus", "variants", args.variants, corpus_mod.DEFAULT_N_VARIANTS)),
        aesthetic_threshold=float(cfg.resolve("build-corpus", "aesthetic_threshold", args.aesthetic_threshold,
                                              corpus_mod.DEFAULT_AESTHETIC_THRESHOLD)),
        seed=cfg.resolve_seed("build-corpus", args.seed),
    )
    clips, manifest = corpus_mod.build_corpus(args.inputs, config)
    manifest_path = args.manifest or str(args.out) + ".manifest.json"
    corpus_mod.write_corpus(clips, manifest, args.out, manifest_path)
    return 0


def _cmd_train(args, cfg: _Config) -> int:
    iterations = int(cfg.resolve("train", "iterations", args.iterations, policy_mod.DEFAULT_ITERATIONS))
    lr = float(cfg.resolve("train", "lr", args.lr, policy_mod.DEFAULT_LEARNING_RATE))
    epochs = int(cfg.resolve("train", "epochs_per_iter", args.epochs_per_iter, policy_mod.DEFAULT_EPOCHS_PER_ITER))
    holdout = float(cfg.resolve("train", "holdout_frac", args.holdout_frac, policy_mod.DEFAULT_HOLDOUT_FRAC))
    seed = cfg.resolve_seed("train", args.seed)

    clips, header = corpus_mod.read_corpus(args.corpus)
    policy, trace = policy_mod.dagger_train(
        clips,
        iterations=iterations,
        epochs_per_iter=epochs,
        learning_rate=lr,
        holdout_frac=holdout,
        seed=seed,
    )
    policy.corpus_manifest_sha256 = header.get("manifest_sha256")
    policy_mod.save_policy(policy, args.out)
    _write_manifest(
        args.out,
        "train",
        {"iterations": iterations, "lr": lr, "epochs_per_iter": epochs,
         "holdout_frac": holdout, "seed": seed},
        [args.corpus],
        [args.out],
    )
    return 0


def _cmd_edit(args, cfg: _Config) -> int:
    shotlist = segment_mod.read_shots(args.shots)
    policy = policy_mod.load_policy(args.policy)
    storyboard = editor_mod.edit(shotlist, policy)
    plan_path = args.plan or str(args.out).replace(".cutlist.json", "") + ".plan.sh"
    editor_mod.emit_cutlist(storyboard, args.out, plan_path)
    _write_manifest(args.out, "edit", {"shots": str(args.shots), "policy": str(args.policy)},
                    [args.shots, args.policy], [args.out, plan_path])
    return 0


def _edited_size_sequences(pairs):
    sequences = []
    for cutlist_path, shots_path in pairs:
        storyboard = editor_mod.read_cutlist(cutlist_path)
        shotlist = segment_mod.read_shots(shots_path)
        by_id = {s.shot_id: s for s in shotlist.shots}
        try:
            sequences.append([by_id[e.shot_id].shot_size_class for e in storyboard.entries])
        except KeyError as exc:
            raise ValueError(f"{cutlist_path}: entry references unknown shot {exc}") from exc
    return sequences


def _cmd_eval(args, cfg: _Config) -> int:
    n_classes = int(cfg.resolve("eval", "scale", args.scale, 3))
    scale = evaluate_mod.SizeScale.default(n_classes)
    ref_seqs = [segment_mod.read_shots(p).size_sequence() for p in args.ref]
    raw_seqs = [segment_mod.read_shots(p).size_sequence() for p in args.raw]
    edited_seqs = _edited_size_sequences(args.edited)

    report = evaluate_mod.style_report(ref_seqs, raw_seqs, edited_seqs, scale)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, allow_nan=False)
        fh.write("\n")

    base = str(args.out)
    if base.endswith(".json"):
        base = base[: -len(".json")]
    table_path = base + ".tsv"
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(evaluate_mod.report_table(report))
    outputs = [args.out, table_path]

    if not args.no_figure:
        from autocut.figures import render_style_report

        figure_path = base + ".png"
        render_style_report(report, figure_path)
        outputs.append(figure_path)

    inputs = list(args.ref) + list(args.raw) + [p for pair in args.edited for p in pair]
    _write_manifest(args.out, "eval", {"scale": n_classes}, inputs, outputs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autocut",
        description="Learn an editing style from reference footage and apply it to new footage.",
    )
    parser.add_argument("--config", help="JSON config file with per-stage defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a deterministic synthetic feature stream")
    p.add_argument("--spec", required=True, help="scenario JSON (segments with centers, noise, ...)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output .feat.jsonl path")

    p = sub.add_parser("segment", help="segment a feature stream into shots")
    p.add_argument("--input", required=True, help=".feat.jsonl stream")
    p.add_argument("--out", required=True, help="output .shots.jsonl path")
    p.add_argument("--threshold-k", type=float, default=None, help="boundary threshold: mu + k*sigma")
    p.add_argument("--pca", default=None, help="optional .pca.json model applied before segmentation")

    p = sub.add_parser("pca-fit", help="fit incremental PCA over feature streams")
    p.add_argument("inputs", nargs="+", help=".feat.jsonl streams")
    p.add_argument("--out", required=True, help="output .pca.json model path")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--n-components", type=int, default=None)

    p = sub.add_parser("build-corpus", help="build a labeled training corpus from shot files")
    p.add_argument("inputs", nargs="+", help=".shots.jsonl reference files (>= 2)")
    p.add_argument("--out", required=True, help="output .corpus.jsonl path")
    p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest.json)")
    p.add_argument("--target-seconds", type=float, default=None)
    p.add_argument("--variants", type=int, default=None)
    p.add_argument("--aesthetic-threshold", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="train the editing policy by dataset aggregation")
    p.add_argument("--corpus", required=True, help=".corpus.jsonl training corpus")
    p.add_argument("--out", required=True, help="output .policy.json path")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs-per-iter", type=int, default=None)
    p.add_argument("--holdout-frac", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("edit", help="apply a trained policy to a shot file")
    p.add_argument("--shots", required=True, help=".shots.jsonl footage to edit")
    p.add_argument("--policy", required=True, help=".policy.json trained policy")
    p.add_argument("--out", required=True, help="output .cutlist.json path")
    p.add_argument("--plan", default=None, help="command-plan path (default: derived from --out)")

    p = sub.add_parser("eval", help="compare reference / raw / edited style statistics")
    p.add_argument("--ref", action="append", required=True, help=".shots.jsonl reference corpus (repeatable)")
    p.add_argument("--raw", action="append", required=True, help=".shots.jsonl raw corpus (repeatable)")
    p.add_argument("--edited", action="append", required=True, nargs=2,
                   metavar=("CUTLIST", "SHOTS"), help="edited cutlist plus its shot file (repeatable)")
    p.add_argument("--scale", type=int, choices=(3, 6), default=None)
    p.add_argument("--out", required=True, help="output report JSON path")
    p.add_argument("--no-figure", action="store_true", help="skip the histogram figure")
    return parser


_COMMANDS = {
    "synth": _cmd_synth,
    "segment": _cmd_segment,
    "pca-fit": _cmd_pca_fit,
    "build-corpus": _cmd_build_corpus,
    "train": _cmd_train,
    "edit": _cmd_edit,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _Config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except (ValueError, OSError, RuntimeError, json.JSONDecodeError) as exc:
        return _fail(args.command, str(exc))


if __name__ == "__main__":
    sys.exit(main())
