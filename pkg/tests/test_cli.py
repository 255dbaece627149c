import json
import subprocess
import sys

import numpy as np
import pytest

from autocut.cli import main
from autocut.features import read_stream
from autocut.policy import Policy, save_policy
from autocut.segment import read_shots
from styleworld import BucketWorld


def run_cli(*argv):
    return main([str(a) for a in argv])


def write_scenarios(tmp_path, world, n):
    paths = []
    for i in range(n):
        scenario, seed, _ = world.scenario(i)
        p = tmp_path / f"scene{i}.json"
        p.write_text(json.dumps(scenario))
        paths.append((p, seed))
    return paths


def test_synth_deterministic_reruns(tmp_path):
    world = BucketWorld()
    (spec_path, seed), = write_scenarios(tmp_path, world, 1)
    out1, out2 = tmp_path / "a.feat.jsonl", tmp_path / "b.feat.jsonl"
    assert run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", out1) == 0
    assert run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", out2) == 0
    assert out1.read_bytes() == out2.read_bytes()
    read_stream(out1).validate()


def test_env_seed_fallback(tmp_path, monkeypatch):
    world = BucketWorld()
    (spec_path, seed), = write_scenarios(tmp_path, world, 1)
    out1, out2 = tmp_path / "a.feat.jsonl", tmp_path / "b.feat.jsonl"
    monkeypatch.setenv("AUTOCUT_SEED", str(seed))
    assert run_cli("synth", "--spec", spec_path, "--out", out1) == 0
    assert run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", out2) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_config_file_precedence(tmp_path):
    world = BucketWorld()
    (spec_path, seed), = write_scenarios(tmp_path, world, 1)
    feat = tmp_path / "x.feat.jsonl"
    run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", feat)

    # threshold_k from the config file (inf -> no boundaries, one shot);
    # an explicit flag must override it.
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"segment": {"threshold_k": 1e9}}))
    shots_cfg = tmp_path / "cfg.shots.jsonl"
    assert run_cli("--config", cfg, "segment", "--input", feat, "--out", shots_cfg) == 0
    assert len(read_shots(shots_cfg)) == 1
    shots_flag = tmp_path / "flag.shots.jsonl"
    assert run_cli("--config", cfg, "segment", "--input", feat, "--out", shots_flag,
                   "--threshold-k", "1.0") == 0
    assert len(read_shots(shots_flag)) > 1


def test_manifest_written_with_config_echo(tmp_path):
    world = BucketWorld()
    (spec_path, seed), = write_scenarios(tmp_path, world, 1)
    feat = tmp_path / "x.feat.jsonl"
    run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", feat)
    manifest = json.loads((tmp_path / "x.feat.jsonl.manifest.json").read_text())
    assert manifest["stage"] == "synth"
    assert manifest["config"]["seed"] == seed
    assert str(spec_path) in manifest["inputs"]


def test_edit_with_unfitted_policy_fails_cleanly(tmp_path, capsys):
    world = BucketWorld()
    (spec_path, seed), = write_scenarios(tmp_path, world, 1)
    feat = tmp_path / "x.feat.jsonl"
    shots = tmp_path / "x.shots.jsonl"
    run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", feat)
    run_cli("segment", "--input", feat, "--out", shots, "--threshold-k", "1.0")
    policy_path = tmp_path / "p.policy.json"
    save_policy(Policy.zeros(), policy_path)
    code = run_cli("edit", "--shots", shots, "--policy", policy_path,
                   "--out", tmp_path / "x.cutlist.json")
    assert code == 1
    err = json.loads(capsys.readouterr().err.strip())
    assert err == {"error": "policy not fitted", "stage": "edit"}


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-stage"])
    assert exc.value.code == 2


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--bogus", "x"])
    assert exc.value.code == 2


def test_console_script_installed():
    out = subprocess.run([sys.executable, "-m", "autocut.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    for stage in ("synth", "segment", "pca-fit", "build-corpus", "train", "edit", "eval"):
        assert stage in out.stdout


def test_pca_fit_and_segment_with_model(tmp_path):
    rng = np.random.default_rng(0)
    from synthdata import make_scenario, separated_centers
    from autocut.features import synth_stream, write_stream

    centers = separated_centers(rng, 3, dim=1024, scale=3.0)
    scenario = make_scenario(centers, [40, 40, 40], [0.02] * 3, [0.5] * 3, [0, 1, 2])
    feat = tmp_path / "w.feat.jsonl"
    write_stream(synth_stream(scenario, 5), feat)

    model_path = tmp_path / "m.pca.json"
    assert run_cli("pca-fit", feat, "--out", model_path, "--batch-size", "50") == 0
    shots = tmp_path / "w.shots.jsonl"
    assert run_cli("segment", "--input", feat, "--out", shots, "--pca", model_path,
                   "--threshold-k", "1.0") == 0
    sl = read_shots(shots)
    assert sl.dim_semantic == 64
    assert len(sl) == 3


def test_pca_fit_too_few_rows_fails(tmp_path, capsys):
    world = BucketWorld()
    (spec_path, seed), = write_scenarios(tmp_path, world, 1)
    feat = tmp_path / "x.feat.jsonl"
    run_cli("synth", "--spec", spec_path, "--seed", seed, "--out", feat)
    stream = read_stream(feat)
    # keep only 10 frames: below the 64-row minimum for the first fit
    from autocut.features import FeatureStream, write_stream

    small = FeatureStream(stream.source_id, stream.fps_sampled, stream.dim_semantic,
                          stream.frames[:10])
    write_stream(small, feat)
    code = run_cli("pca-fit", feat, "--out", tmp_path / "m.pca.json")
    assert code == 1
    assert "unfitted" in json.loads(capsys.readouterr().err.strip())["error"]


def mini_pipeline(tmp_path, out_dir, seed_offset=0):
    """Small end-to-end run; returns the list of produced files."""
    world = BucketWorld(junk_prob=0.25)
    out_dir.mkdir(exist_ok=True)
    shots_paths = []
    for i in range(4):
        scenario, seed, _ = world.scenario(i)
        spec_path = out_dir / f"s{i}.json"
        spec_path.write_text(json.dumps(scenario))
        feat = out_dir / f"s{i}.feat.jsonl"
        assert run_cli("synth", "--spec", spec_path, "--seed", seed + seed_offset, "--out", feat) == 0
        shots = out_dir / f"s{i}.shots.jsonl"
        assert run_cli("segment", "--input", feat, "--out", shots, "--threshold-k", "1.0") == 0
        shots_paths.append(shots)

    corpus = out_dir / "c.corpus.jsonl"
    assert run_cli("build-corpus", *shots_paths, "--out", corpus,
                   "--target-seconds", "120", "--variants", "3",
                   "--aesthetic-threshold", "0.1", "--seed", "11") == 0
    policy = out_dir / "p.policy.json"
    assert run_cli("train", "--corpus", corpus, "--out", policy,
                   "--iterations", "5", "--seed", "12") == 0
    edited_pairs = []
    for k in range(3):
        cutlist = out_dir / f"e{k}.cutlist.json"
        assert run_cli("edit", "--shots", shots_paths[k], "--policy", policy, "--out", cutlist) == 0
        edited_pairs.extend(["--edited", cutlist, shots_paths[k]])
    report = out_dir / "report.json"
    assert run_cli("eval", "--ref", shots_paths[1], "--raw", shots_paths[2],
                   *edited_pairs, "--out", report) == 0


def test_mini_pipeline_outputs(tmp_path):
    mini_pipeline(tmp_path, tmp_path / "run")
    run = tmp_path / "run"
    report = json.loads((run / "report.json").read_text())
    assert set(report["histograms"]) == {"reference", "raw", "edited"}
    assert (run / "report.tsv").exists()
    assert (run / "report.png").exists()
    assert (run / "e0.plan.sh").exists()
    cutlist = json.loads((run / "e0.cutlist.json").read_text())
    assert "entries" in cutlist and "skipped" in cutlist
