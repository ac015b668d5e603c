"""Command line front end.

    painformer <command> [flags]

Commands: rasterize, embed, fuse, train-toy, loso, attention, params.
Global flags: --seed (u64), --config (JSON file with flat dotted keys such
as "train-toy.steps" or a bare "seed"; explicit flags override the file).

Exit codes: 0 success, 2 usage or contract error, 1 internal error. stdout
carries data and output paths, stderr carries diagnostics. Every command is
deterministic in (config, seed): re-running writes byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .backbone import PainFormer, default_config, parameter_count, toy_config, attention_map
from .errors import ContractError, require
from .fusion import decision_fusion, fuse_add, fuse_concat, fuse_multimodal_biovid, unify_embeddings
from .heads import EmbeddingMixer, VideoEncoder
from .imaging import (StftParams, get_colormap, load_signal, rasterize_spectrogram,
                      rasterize_waveform, read_ppm, write_image)
from .serialization import load_checkpoint, load_embedding, load_into, save_checkpoint, save_embedding
from .training import (ScheduleConfig, TrainConfig, default_loso_spec, default_toy_specs,
                       make_synthetic_task, run_loso, train_toy_multitask)

_REFERENCE_COUNTS = [
    ("backbone", 19.60e6),
    ("embedding-mixer", 9.85e6),
    ("video-encoder", 3.37e6),
]


class _Opts:
    """Flag > config-file > default resolution for one command."""

    def __init__(self, args: argparse.Namespace, config: dict, command: str):
        self.args = args
        self.config = config
        self.command = command

    def get(self, name: str, default):
        flag = getattr(self.args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        key = f"{self.command}.{name}"
        if key in self.config:
            return self.config[key]
        return default

    def seed(self, default: int = 0) -> int:
        if self.args.seed is not None:
            return self.args.seed
        return int(self.config.get("seed", default))


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ContractError(f"cannot read config {path}: {e}") from None
    require(isinstance(cfg, dict), "config must be a JSON object of dotted keys")
    return cfg


def _load_image(path: str, size: int) -> np.ndarray:
    pixels = read_ppm(path)
    require(pixels.shape[:2] == (size, size),
            f"{path}: expected a {size}x{size} image, got {pixels.shape[1]}x{pixels.shape[0]}")
    return pixels.astype(np.float32) / np.float32(255.0)


def _build_model(arch: str, seed: int, checkpoint: str | None) -> PainFormer:
    require(arch in ("default", "toy"), f"unknown arch {arch!r}")
    model = PainFormer(default_config() if arch == "default" else toy_config(), seed=seed)
    if checkpoint is not None:
        state = load_checkpoint(checkpoint)
        if any(k.startswith("backbone.") for k in state):
            state = {k[len("backbone."):]: v for k, v in state.items()
                     if k.startswith("backbone.")}
        load_into(model, state)
    return model


# ----------------------------------------------------------------- commands

def cmd_rasterize(args, config) -> int:
    opt = _Opts(args, config, "rasterize")
    kind = opt.get("kind", "waveform")
    require(kind in ("waveform", "angle", "phase", "psd"), f"unknown kind {kind!r}")
    rate = opt.get("rate", None)
    sig = load_signal(args.input, rate=float(rate) if rate is not None else None)
    if kind == "waveform":
        pixels = rasterize_waveform(sig.samples)
    else:
        window = opt.get("window", None)
        hop = opt.get("hop", None)
        nfft = opt.get("nfft", None)
        params = None
        if window is not None or hop is not None or nfft is not None:
            base = StftParams.default_for_rate(sig.rate)
            params = StftParams(int(window if window is not None else base.window),
                                int(hop if hop is not None else base.hop),
                                int(nfft if nfft is not None else base.nfft))
        pixels = rasterize_spectrogram(sig.samples, sig.rate, kind, params=params,
                                       colormap=opt.get("colormap", "grayscale"))
    out = opt.get("out", None) or f"{Path(args.input).stem}-{kind}.png"
    write_image(out, pixels)
    print(out)
    return 0


def cmd_embed(args, config) -> int:
    opt = _Opts(args, config, "embed")
    arch = opt.get("arch", "default")
    model = _build_model(arch, opt.seed(), opt.get("checkpoint", None))
    embs = np.stack([model.embed(_load_image(p, model.cfg.image_size)).data
                     for p in args.inputs])
    if opt.get("unify", False):
        out_vec = unify_embeddings(embs)
    elif len(args.inputs) == 1:
        out_vec = embs[0]
    else:
        out_vec = embs
    out = opt.get("out", None) or "embedding.pfem"
    save_embedding(out, out_vec)
    print(out)
    return 0


def cmd_fuse(args, config) -> int:
    opt = _Opts(args, config, "fuse")
    mode = opt.get("mode", None)
    require(mode in ("add", "concat", "decision", "biovid-multimodal"),
            f"unknown fusion mode {mode!r}")
    vecs = [load_embedding(p) for p in args.inputs]
    if mode == "add":
        require(len(vecs) == 2, "sum fusion takes exactly two embeddings")
        fused = fuse_add(vecs[0], vecs[1])
    elif mode == "concat":
        fused = fuse_concat(vecs)
    elif mode == "decision":
        fused = decision_fusion(vecs)
    else:
        require(len(vecs) == 4,
                "multimodal fusion takes gsr, rgb, thermal, depth embeddings in that order")
        encoder = VideoEncoder(seed=opt.seed())
        ckpt = opt.get("checkpoint", None)
        if ckpt is not None:
            load_into(encoder, load_checkpoint(ckpt))
        fused = fuse_multimodal_biovid(vecs[0], vecs[1], vecs[2], vecs[3], encoder)
    out = opt.get("out", None) or "fused.pfem"
    save_embedding(out, fused)
    print(out)
    return 0


def cmd_train_toy(args, config) -> int:
    opt = _Opts(args, config, "train-toy")
    seed = opt.seed(7)
    cfg = TrainConfig(
        steps=int(opt.get("steps", 300)),
        batch=int(opt.get("batch", 32)),
        base_lr=float(opt.get("lr", 7e-3)),
        warmup_steps=int(opt.get("warmup", 20)),
        cooldown_steps=int(opt.get("cooldown", 20)),
        weight_decay=float(opt.get("weight-decay", 0.01)),
        label_smoothing=float(opt.get("label-smoothing", 0.05)),
        mode=opt.get("loss-mode", "standard"),
        dropout=float(opt.get("dropout", 0.0)),
        droppath=float(opt.get("droppath", 0.0)),
        seed=seed,
    )
    tasks = [make_synthetic_task(s, seed) for s in default_toy_specs()]
    result = train_toy_multitask(tasks, cfg)
    metrics_path = opt.get("metrics", None) or "metrics.jsonl"
    with open(metrics_path, "w") as f:
        for rec in result.records:
            f.write(json.dumps(rec) + "\n")
    ckpt_path = opt.get("checkpoint-out", None) or "toy.pfck"
    save_checkpoint(ckpt_path, result.state_dict())
    print(json.dumps({"metrics": str(metrics_path), "checkpoint": str(ckpt_path),
                      "accuracies": result.accuracies}))
    return 0


def cmd_loso(args, config) -> int:
    opt = _Opts(args, config, "loso")
    seed = opt.seed(10)
    task = make_synthetic_task(default_loso_spec(), seed=seed)
    report = run_loso(task, steps=int(opt.get("steps", 300)),
                      lr=float(opt.get("lr", 0.05)),
                      weight_decay=float(opt.get("weight-decay", 0.3)), seed=seed)
    for row in report["folds"]:
        print(json.dumps(row))
    summary = {k: v for k, v in report.items() if k != "folds"}
    print(json.dumps(summary))
    return 0


def cmd_attention(args, config) -> int:
    opt = _Opts(args, config, "attention")
    arch = opt.get("arch", "default")
    model = _build_model(arch, opt.seed(), opt.get("checkpoint", None))
    image = _load_image(args.input, model.cfg.image_size)
    heat = attention_map(model, image, head=int(opt.get("head", 0)))
    lut = get_colormap(opt.get("colormap", "ember"))
    idx = np.clip(np.floor(heat * 255.0 + 0.5), 0, 255).astype(np.int64)
    pixels = lut[idx]
    out = opt.get("out", None) or f"{Path(args.input).stem}-attention.png"
    write_image(out, pixels)
    print(out)
    return 0


def cmd_params(args, config) -> int:
    opt = _Opts(args, config, "params")
    seed = opt.seed()
    modules = [
        ("backbone", PainFormer(seed=seed)),
        ("embedding-mixer", EmbeddingMixer(seed=seed)),
        ("video-encoder", VideoEncoder(seed=seed)),
    ]
    total = 0
    for (name, module), (_, ref) in zip(modules, _REFERENCE_COUNTS):
        count = parameter_count(module)
        total += count
        print(f"{name:16s} {count:>12,d}  (reference {ref / 1e6:.2f}M)")
    print(f"{'total':16s} {total:>12,d}")
    return 0


# ------------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="painformer",
        description="Signal rasterization, embeddings, fusion, and desk-scale training.")
    parser.add_argument("--seed", type=int, default=None, help="root RNG seed (u64)")
    parser.add_argument("--config", default=None,
                        help="JSON config with flat dotted keys; flags override")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("rasterize", help="render a signal to an image")
    p.add_argument("input", help="signal file (.csv needs --rate, raw f32 uses its sidecar)")
    p.add_argument("--kind", choices=["waveform", "angle", "phase", "psd"], default=None)
    p.add_argument("--rate", type=float, default=None, help="sampling rate in Hz")
    p.add_argument("--window", type=int, default=None, help="analysis window length")
    p.add_argument("--hop", type=int, default=None, help="hop between frames")
    p.add_argument("--nfft", type=int, default=None, help="transform length")
    p.add_argument("--colormap", default=None, help="grayscale or ember")
    p.add_argument("--out", default=None, help="output image (.png or .ppm)")
    p.set_defaults(func=cmd_rasterize)

    p = sub.add_parser("embed", help="extract embeddings from PPM images")
    p.add_argument("inputs", nargs="+", help="PPM P6 images sized to the chosen arch")
    p.add_argument("--arch", choices=["default", "toy"], default=None)
    p.add_argument("--checkpoint", default=None, help="PFCK weights to load")
    p.add_argument("--unify", action="store_true", default=None,
                   help="concatenate frame embeddings into one vector")
    p.add_argument("--out", default=None, help="output .pfem path")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("fuse", help="combine embeddings or probability vectors")
    p.add_argument("inputs", nargs="+", help=".pfem inputs")
    p.add_argument("--mode", choices=["add", "concat", "decision", "biovid-multimodal"],
                   default=None)
    p.add_argument("--checkpoint", default=None, help="PFCK weights for the video encoder")
    p.add_argument("--out", default=None, help="output .pfem path")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("train-toy", help="train the reduced backbone on synthetic tasks")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--cooldown", type=int, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--label-smoothing", type=float, default=None)
    p.add_argument("--loss-mode", choices=["standard", "verbatim"], default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--droppath", type=float, default=None)
    p.add_argument("--metrics", default=None, help="JSON-lines metrics path")
    p.add_argument("--checkpoint-out", default=None, help="PFCK output path")
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("loso", help="leave-one-subject-out evaluation on synthetic data")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.set_defaults(func=cmd_loso)

    p = sub.add_parser("attention", help="write an attention heat map for an image")
    p.add_argument("input", help="PPM P6 image")
    p.add_argument("--arch", choices=["default", "toy"], default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--head", type=int, default=None)
    p.add_argument("--colormap", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_attention)

    p = sub.add_parser("params", help="report parameter counts against reference sizes")
    p.set_defaults(func=cmd_params)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:   # pragma: no cover - defensive
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
