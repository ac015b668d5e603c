"""End-to-end tests for the painformer command line.

Commands run in-process through cli.main so exit codes and stdout/stderr
can be asserted directly. All artifacts land in tmp_path.
"""

import hashlib
import json

import numpy as np
import pytest

from painformer.cli import main
from painformer.imaging import read_ppm, write_ppm
from painformer.serialization import load_checkpoint, load_embedding, save_embedding


def sha256(path) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def toy_ppm(workdir):
    rng = np.random.default_rng(3)
    pixels = rng.integers(0, 256, size=(32, 32, 3)).astype(np.uint8)
    write_ppm(workdir / "toy.ppm", pixels)
    return str(workdir / "toy.ppm")


@pytest.fixture
def sine_csv(workdir):
    t = np.arange(2048) / 512.0
    np.savetxt(workdir / "sine.csv", np.sin(2 * np.pi * 8.0 * t), delimiter=",")
    return str(workdir / "sine.csv")


# ------------------------------------------------------------- exit codes

def test_no_command_is_usage_error(workdir, capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_command_exits_2(workdir):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_bad_kind_exits_2(workdir, sine_csv):
    with pytest.raises(SystemExit) as exc:
        main(["rasterize", sine_csv, "--kind", "sonogram"])
    assert exc.value.code == 2


def test_csv_without_rate_is_contract_error(workdir, sine_csv, capsys):
    assert main(["rasterize", sine_csv, "--kind", "psd"]) == 2
    assert "rate" in capsys.readouterr().err


def test_missing_input_file_exits_2(workdir, capsys):
    assert main(["embed", "nope.ppm", "--arch", "toy"]) == 2
    err = capsys.readouterr().err
    assert "nope.ppm" in err


def test_stdout_carries_only_the_output_path(workdir, toy_ppm, capsys):
    assert main(["embed", toy_ppm, "--arch", "toy", "--out", "e.pfem"]) == 0
    out = capsys.readouterr().out
    assert out.strip() == "e.pfem"


# -------------------------------------------------------------- rasterize

def test_rasterize_waveform_writes_default_name(workdir, sine_csv, capsys):
    assert main(["rasterize", sine_csv, "--rate", "512"]) == 0
    path = capsys.readouterr().out.strip()
    assert path == "sine-waveform.png"
    assert (workdir / path).exists()


def test_rasterize_psd_ppm_is_image_sized(workdir, sine_csv):
    assert main(["rasterize", sine_csv, "--rate", "512", "--kind", "psd",
                 "--out", "p.ppm"]) == 0
    assert read_ppm(workdir / "p.ppm").shape == (224, 224, 3)


def test_rasterize_rerun_is_byte_identical(workdir, sine_csv):
    args = ["rasterize", sine_csv, "--rate", "512", "--kind", "angle", "--out", "a.ppm"]
    assert main(args) == 0
    first = sha256(workdir / "a.ppm")
    assert main(args) == 0
    assert sha256(workdir / "a.ppm") == first


def test_rasterize_window_flags_change_output(workdir, sine_csv):
    assert main(["rasterize", sine_csv, "--rate", "512", "--kind", "psd",
                 "--out", "d.ppm"]) == 0
    assert main(["rasterize", sine_csv, "--rate", "512", "--kind", "psd",
                 "--window", "128", "--hop", "32", "--nfft", "128",
                 "--out", "w.ppm"]) == 0
    assert sha256(workdir / "d.ppm") != sha256(workdir / "w.ppm")


# ------------------------------------------------------------------ embed

def test_embed_single_toy_image(workdir, toy_ppm):
    assert main(["embed", toy_ppm, "--arch", "toy", "--out", "e.pfem"]) == 0
    assert load_embedding(workdir / "e.pfem").shape == (32,)


def test_embed_multiple_images_stack(workdir, toy_ppm):
    assert main(["embed", toy_ppm, toy_ppm, toy_ppm, "--arch", "toy",
                 "--out", "m.pfem"]) == 0
    assert load_embedding(workdir / "m.pfem").shape == (3, 32)


def test_embed_unify_flattens(workdir, toy_ppm):
    assert main(["embed", toy_ppm, toy_ppm, "--arch", "toy", "--unify",
                 "--out", "u.pfem"]) == 0
    unified = load_embedding(workdir / "u.pfem")
    assert unified.shape == (64,)


def test_embed_seed_controls_weights(workdir, toy_ppm):
    assert main(["--seed", "1", "embed", toy_ppm, "--arch", "toy", "--out", "s1.pfem"]) == 0
    assert main(["--seed", "2", "embed", toy_ppm, "--arch", "toy", "--out", "s2.pfem"]) == 0
    assert main(["--seed", "1", "embed", toy_ppm, "--arch", "toy", "--out", "s1b.pfem"]) == 0
    a = load_embedding(workdir / "s1.pfem")
    b = load_embedding(workdir / "s2.pfem")
    assert not np.array_equal(a, b)
    assert np.array_equal(a, load_embedding(workdir / "s1b.pfem"))


def test_embed_rejects_wrong_image_size(workdir, toy_ppm, capsys):
    # toy image against the full-size architecture
    assert main(["embed", toy_ppm, "--arch", "default"]) == 2
    assert "224x224" in capsys.readouterr().err


def test_embed_checkpoint_roundtrip(workdir, toy_ppm):
    assert main(["--seed", "7", "train-toy", "--steps", "4", "--warmup", "1",
                 "--cooldown", "1", "--batch", "8",
                 "--metrics", "m.jsonl", "--checkpoint-out", "t.pfck"]) == 0
    assert main(["embed", toy_ppm, "--arch", "toy", "--checkpoint", "t.pfck",
                 "--out", "ck.pfem"]) == 0
    assert main(["--seed", "7", "embed", toy_ppm, "--arch", "toy", "--out", "raw.pfem"]) == 0
    trained = load_embedding(workdir / "ck.pfem")
    fresh = load_embedding(workdir / "raw.pfem")
    assert trained.shape == fresh.shape == (32,)
    assert not np.array_equal(trained, fresh)


# ------------------------------------------------------------------- fuse

def test_fuse_concat_lengths_add(workdir):
    save_embedding("a.pfem", np.arange(160, dtype=np.float32))
    save_embedding("b.pfem", np.arange(40, dtype=np.float32))
    assert main(["fuse", "a.pfem", "b.pfem", "--mode", "concat", "--out", "c.pfem"]) == 0
    fused = load_embedding(workdir / "c.pfem")
    assert fused.shape == (200,)
    np.testing.assert_array_equal(fused[:160], np.arange(160, dtype=np.float32))


def test_fuse_add_identity(workdir):
    vec = np.linspace(-1.0, 1.0, 160, dtype=np.float32)
    save_embedding("v.pfem", vec)
    save_embedding("z.pfem", np.zeros(160, np.float32))
    assert main(["fuse", "v.pfem", "z.pfem", "--mode", "add", "--out", "s.pfem"]) == 0
    np.testing.assert_array_equal(load_embedding(workdir / "s.pfem"), vec)


def test_fuse_add_mismatch_names_both_shapes(workdir, capsys):
    save_embedding("a.pfem", np.zeros(160, np.float32))
    save_embedding("b.pfem", np.zeros(40, np.float32))
    assert main(["fuse", "a.pfem", "b.pfem", "--mode", "add"]) == 2
    err = capsys.readouterr().err
    assert "(160,)" in err and "(40,)" in err


def test_fuse_decision_averages(workdir):
    save_embedding("p1.pfem", np.array([1.0, 0.0], np.float32))
    save_embedding("p2.pfem", np.array([0.0, 1.0], np.float32))
    assert main(["fuse", "p1.pfem", "p2.pfem", "--mode", "decision", "--out", "d.pfem"]) == 0
    np.testing.assert_allclose(load_embedding(workdir / "d.pfem"), [0.5, 0.5], atol=1e-7)


def test_fuse_biovid_multimodal_layout(workdir):
    gsr = np.linspace(0.0, 1.0, 160, dtype=np.float32)
    save_embedding("gsr.pfem", gsr)
    for name in ("rgb", "thermal", "depth"):
        save_embedding(f"{name}.pfem", np.zeros(22080, np.float32))
    assert main(["--seed", "0", "fuse", "gsr.pfem", "rgb.pfem", "thermal.pfem",
                 "depth.pfem", "--mode", "biovid-multimodal", "--out", "mm.pfem"]) == 0
    fused = load_embedding(workdir / "mm.pfem")
    assert fused.shape == (200,)
    np.testing.assert_allclose(fused[:160], gsr, rtol=1e-6)


def test_fuse_biovid_wrong_arity(workdir, capsys):
    save_embedding("gsr.pfem", np.zeros(160, np.float32))
    assert main(["fuse", "gsr.pfem", "--mode", "biovid-multimodal"]) == 2
    assert "gsr" in capsys.readouterr().err


# -------------------------------------------------------------- train-toy

def test_train_toy_writes_metrics_and_checkpoint(workdir, capsys):
    assert main(["--seed", "7", "train-toy", "--steps", "5", "--warmup", "2",
                 "--cooldown", "1", "--batch", "8",
                 "--metrics", "m.jsonl", "--checkpoint-out", "t.pfck"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["metrics"] == "m.jsonl"
    assert set(summary["accuracies"]) == {"stimulus", "modality", "binary"}
    lines = [json.loads(line) for line in open(workdir / "m.jsonl")]
    assert len(lines) == 5
    assert all("total_loss" in rec and "lr" in rec for rec in lines)
    state = load_checkpoint(workdir / "t.pfck")
    assert any(key.startswith("backbone.") for key in state)
    assert "loss_w" in state


def test_train_toy_rerun_is_byte_identical(workdir):
    args = ["--seed", "7", "train-toy", "--steps", "4", "--warmup", "1",
            "--cooldown", "1", "--batch", "8",
            "--metrics", "m.jsonl", "--checkpoint-out", "t.pfck"]
    assert main(args) == 0
    metrics1, ckpt1 = sha256(workdir / "m.jsonl"), sha256(workdir / "t.pfck")
    assert main(args) == 0
    assert sha256(workdir / "m.jsonl") == metrics1
    assert sha256(workdir / "t.pfck") == ckpt1


def test_config_file_supplies_defaults_and_flags_override(workdir, capsys):
    cfg = {"seed": 7,
           "train-toy.steps": 3, "train-toy.warmup": 1, "train-toy.cooldown": 1,
           "train-toy.batch": 8,
           "train-toy.metrics": "m.jsonl", "train-toy.checkpoint-out": "t.pfck"}
    with open(workdir / "cfg.json", "w") as f:
        json.dump(cfg, f)
    assert main(["--config", "cfg.json", "train-toy"]) == 0
    capsys.readouterr()
    assert sum(1 for _ in open(workdir / "m.jsonl")) == 3
    assert main(["--config", "cfg.json", "train-toy", "--steps", "4"]) == 0
    assert sum(1 for _ in open(workdir / "m.jsonl")) == 4


def test_config_must_be_object(workdir, capsys):
    with open(workdir / "bad.json", "w") as f:
        f.write("[1, 2]")
    assert main(["--config", "bad.json", "params"]) == 2
    assert "object" in capsys.readouterr().err


# ------------------------------------------------------------------- loso

def test_loso_prints_folds_then_summary(workdir, capsys):
    assert main(["loso"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = [json.loads(line) for line in lines]
    folds, summary = rows[:-1], rows[-1]
    assert len(folds) == 5
    assert {row["subject"] for row in folds} == set(range(5))
    assert all(set(row) >= {"fold", "accuracy", "macro_recall", "macro_f1",
                            "baseline_accuracy"} for row in folds)
    assert summary["mean_accuracy"] >= summary["baseline_mean_accuracy"]


# -------------------------------------------------------------- attention

def test_attention_toy_single_token_grid_is_flat(workdir, toy_ppm):
    # the reduced arch ends on a 1x1 grid, so the normalized map is all zeros
    assert main(["attention", toy_ppm, "--arch", "toy", "--out", "att.ppm"]) == 0
    pixels = read_ppm(workdir / "att.ppm")
    assert pixels.shape == (32, 32, 3)
    assert main(["attention", toy_ppm, "--arch", "toy", "--out", "att2.ppm"]) == 0
    assert sha256(workdir / "att.ppm") == sha256(workdir / "att2.ppm")


def test_attention_default_arch_writes_nonconstant_map(workdir):
    rng = np.random.default_rng(5)
    pixels = rng.integers(0, 256, size=(224, 224, 3)).astype(np.uint8)
    write_ppm(workdir / "big.ppm", pixels)
    assert main(["attention", str(workdir / "big.ppm"), "--out", "att.ppm"]) == 0
    heat = read_ppm(workdir / "att.ppm")
    assert heat.shape == (224, 224, 3)
    assert heat.min() < heat.max()


def test_attention_head_out_of_range(workdir, toy_ppm, capsys):
    assert main(["attention", toy_ppm, "--arch", "toy", "--head", "99"]) == 2
    assert "head" in capsys.readouterr().err.lower()


# ----------------------------------------------------------------- params

def test_params_reports_counts_and_references(workdir, capsys):
    assert main(["params"]) == 0
    out = capsys.readouterr().out
    assert "17,549,120" in out
    assert "10,590,594" in out
    assert "2,963,880" in out
    assert "19.60M" in out and "9.85M" in out and "3.37M" in out
