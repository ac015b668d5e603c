"""Four-stage hierarchical encoder mixing spectral-gating and attention layers.

Input images are cut into patches, embedded, and pushed through four stages.
Early stages mix tokens with learned frequency-domain filters (FFT, a
pointwise complex gate, inverse FFT); later stages use multi-head
self-attention. Stages are bridged by stride-2 convolutions that halve the
grid, and a global average pool turns the final grid into one embedding
vector.

Stage layout, channel widths, and head counts live in BackboneConfig; the
default configuration pools a 224x224x3 image down to a 160-dim embedding
through grids 14x14x64, 7x7x128, 4x4x320, and 2x2x160.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, param
from .errors import ContractError, require
from .rng import substream

__all__ = [
    "StageConfig", "BackboneConfig", "default_config", "toy_config",
    "Module", "Linear", "LayerNorm", "Mlp", "SpectralLayer", "AttentionLayer",
    "PainFormer", "painformer_forward", "attention_map", "bilinear_resize",
    "parameter_count",
]


# ------------------------------------------------------------------- config

@dataclass(frozen=True)
class StageConfig:
    spectral_layers: int
    attention_layers: int
    heads: int
    dim: int


@dataclass(frozen=True)
class BackboneConfig:
    image_size: int = 224
    patch_size: int = 16
    in_channels: int = 3
    mlp_ratio: int = 4
    stages: tuple[StageConfig, ...] = field(default_factory=tuple)

    def validate(self) -> None:
        require(len(self.stages) >= 1, "need at least one stage")
        require(self.image_size > 0 and self.patch_size > 0, "sizes must be positive")
        require(self.image_size % self.patch_size == 0,
                f"image size {self.image_size} not divisible by patch size {self.patch_size}")
        for i, s in enumerate(self.stages):
            require(s.dim > 0 and s.heads > 0, f"stage {i}: dim and heads must be positive")
            require(s.spectral_layers >= 0 and s.attention_layers >= 0,
                    f"stage {i}: layer counts must be nonnegative")
            if s.attention_layers > 0:
                require(s.dim % s.heads == 0,
                        f"stage {i}: dim {s.dim} not divisible by {s.heads} heads")

    def resolutions(self) -> list[int]:
        """Grid side length at the entry of each stage."""
        res = self.image_size // self.patch_size
        out = [res]
        for _ in self.stages[1:]:
            res = (res + 2 - 3) // 2 + 1    # 3x3 conv, stride 2, pad 1
            out.append(res)
        return out


def default_config() -> BackboneConfig:
    return BackboneConfig(stages=(
        StageConfig(spectral_layers=2, attention_layers=1, heads=2, dim=64),
        StageConfig(spectral_layers=2, attention_layers=2, heads=4, dim=128),
        StageConfig(spectral_layers=0, attention_layers=12, heads=10, dim=320),
        StageConfig(spectral_layers=0, attention_layers=3, heads=16, dim=160),
    ))


def toy_config() -> BackboneConfig:
    """Small configuration for fast experiments: 32x32x3 in, 32-dim out."""
    return BackboneConfig(image_size=32, patch_size=4, stages=(
        StageConfig(spectral_layers=1, attention_layers=1, heads=2, dim=16),
        StageConfig(spectral_layers=1, attention_layers=1, heads=2, dim=32),
        StageConfig(spectral_layers=0, attention_layers=2, heads=4, dim=48),
        StageConfig(spectral_layers=0, attention_layers=1, heads=4, dim=32),
    ))


# ------------------------------------------------------------- module base

class Module:
    """Minimal parameter container: named_parameters walks attributes."""

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for k, v in vars(self).items():
            if isinstance(v, Tensor):
                if v.requires_grad:
                    out[prefix + k] = v
            elif isinstance(v, Module):
                out.update(v.named_parameters(prefix + k + "."))
            elif isinstance(v, (list, tuple)):
                for i, item in enumerate(v):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{prefix}{k}.{i}."))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out[f"{prefix}{k}.{i}"] = item
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())


def parameter_count(module: Module) -> int:
    return int(sum(p.data.size for p in module.parameters()))


class Linear(Module):
    def __init__(self, din: int, dout: int, rng: np.random.Generator,
                 bias: bool = True, dtype=np.float32):
        self.w = param(rng.standard_normal((din, dout)) * 0.02, dtype=dtype)
        self.b = param(np.zeros(dout), dtype=dtype) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = ad.matmul(x, self.w)
        return ad.add(y, self.b) if self.b is not None else y


class LayerNorm(Module):
    def __init__(self, d: int, dtype=np.float32):
        self.gamma = param(np.ones(d), dtype=dtype)
        self.beta = param(np.zeros(d), dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return ad.layer_norm(x, self.gamma, self.beta)


class Mlp(Module):
    """Two linear maps around a GELU; optionally a 3x3 depthwise conv before
    the GELU (the form used inside spectral layers, where tokens keep their
    grid shape)."""

    def __init__(self, d: int, ratio: int, rng: np.random.Generator,
                 depthwise: bool = False, dtype=np.float32):
        hidden = ratio * d
        self.fc1 = Linear(d, hidden, rng, dtype=dtype)
        self.dw = param(rng.standard_normal((3, 3, hidden)) * 0.02, dtype=dtype) if depthwise else None
        self.fc2 = Linear(hidden, d, rng, dtype=dtype)

    def __call__(self, x: Tensor) -> Tensor:
        h = self.fc1(x)
        if self.dw is not None:
            h = ad.depthwise_conv2d(h, self.dw)
        return self.fc2(ad.gelu(h))


def _droppath(branch: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    """Zero the whole residual branch per sample with probability `rate`.

    rate 0 or a missing rng leaves the graph untouched, so eval output is
    bit-identical to a model without the hook.
    """
    if rate <= 0.0 or rng is None:
        return branch
    shape = (branch.shape[0],) + (1,) * (len(branch.shape) - 1)
    keep = (rng.random(shape) >= rate).astype(branch.data.dtype) / (1.0 - rate)
    return ad.mul(branch, Tensor(keep))


class SpectralLayer(Module):
    """Frequency-domain token mixer: FFT over the grid, one learned complex
    gate per frequency and channel, inverse FFT, then an MLP. One residual
    wraps the whole chain."""

    def __init__(self, res: int, d: int, ratio: int, rng: np.random.Generator, dtype=np.float32):
        self.norm1 = LayerNorm(d, dtype)
        self.filter_re = param(rng.standard_normal((res, res, d)) * 0.02, dtype=dtype)
        self.filter_im = param(rng.standard_normal((res, res, d)) * 0.02, dtype=dtype)
        self.norm2 = LayerNorm(d, dtype)
        self.mlp = Mlp(d, ratio, rng, depthwise=True, dtype=dtype)

    def gate(self, x: Tensor) -> Tensor:
        """FFT -> pointwise complex multiply -> IFFT -> real part.

        With an all-ones filter this is the identity on x.
        """
        z = ad.to_complex(x, ad.scale(x, 0.0))
        spec = ad.fft2(z, axes=(-3, -2))
        k = ad.to_complex(self.filter_re, self.filter_im)
        return ad.real_(ad.ifft2(ad.cmul(spec, k), axes=(-3, -2)))

    def __call__(self, x: Tensor, droppath: float = 0.0,
                 rng: np.random.Generator | None = None) -> Tensor:
        branch = self.mlp(self.norm2(self.gate(self.norm1(x))))
        return ad.add(x, _droppath(branch, droppath, rng))


class AttentionLayer(Module):
    """Pre-norm multi-head self-attention block followed by a pre-norm MLP,
    each wrapped in a residual. Operates on [B, N, d] token sequences."""

    def __init__(self, d: int, heads: int, ratio: int, rng: np.random.Generator, dtype=np.float32):
        require(d % heads == 0, f"dim {d} not divisible by {heads} heads")
        self.heads = heads
        self.norm1 = LayerNorm(d, dtype)
        self.wq = param(rng.standard_normal((d, d)) * 0.02, dtype=dtype)
        self.wk = param(rng.standard_normal((d, d)) * 0.02, dtype=dtype)
        self.wv = param(rng.standard_normal((d, d)) * 0.02, dtype=dtype)
        self.wo = param(rng.standard_normal((d, d)) * 0.02, dtype=dtype)
        self.norm2 = LayerNorm(d, dtype)
        self.mlp = Mlp(d, ratio, rng, depthwise=False, dtype=dtype)
        self.last_attn: np.ndarray | None = None

    def attend(self, x: Tensor, capture: bool = False) -> Tensor:
        b, n, d = x.shape
        h = self.heads
        dh = d // h
        def split(t: Tensor) -> Tensor:
            return ad.transpose(ad.reshape(t, (b, n, h, dh)), (0, 2, 1, 3))
        q = split(ad.matmul(x, self.wq))
        k = split(ad.matmul(x, self.wk))
        v = split(ad.matmul(x, self.wv))
        scores = ad.scale(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
        probs = ad.softmax_rows(scores)
        if capture:
            self.last_attn = np.array(probs.data)
        out = ad.matmul(probs, v)                                   # [b, h, n, dh]
        out = ad.reshape(ad.transpose(out, (0, 2, 1, 3)), (b, n, d))
        return ad.matmul(out, self.wo)

    def __call__(self, x: Tensor, capture: bool = False, droppath: float = 0.0,
                 rng: np.random.Generator | None = None) -> Tensor:
        x = ad.add(x, _droppath(self.attend(self.norm1(x), capture), droppath, rng))
        return ad.add(x, _droppath(self.mlp(self.norm2(x)), droppath, rng))


class Stage(Module):
    def __init__(self, cfg: StageConfig, res: int, ratio: int,
                 rng: np.random.Generator, dtype=np.float32):
        self.res = res
        self.pos = param(rng.standard_normal((res, res, cfg.dim)) * 0.02, dtype=dtype)
        self.spectral = [SpectralLayer(res, cfg.dim, ratio, rng, dtype)
                         for _ in range(cfg.spectral_layers)]
        self.attention = [AttentionLayer(cfg.dim, cfg.heads, ratio, rng, dtype)
                          for _ in range(cfg.attention_layers)]

    def __call__(self, x: Tensor, capture: bool = False, droppath: float = 0.0,
                 rng: np.random.Generator | None = None) -> Tensor:
        b, res, _, d = x.shape
        x = ad.add(x, self.pos)
        for layer in self.spectral:
            x = layer(x, droppath, rng)
        if self.attention:
            tokens = ad.reshape(x, (b, res * res, d))
            for i, layer in enumerate(self.attention):
                is_last = i == len(self.attention) - 1
                tokens = layer(tokens, capture and is_last, droppath, rng)
            x = ad.reshape(tokens, (b, res, res, d))
        return x


# -------------------------------------------------------------------- model

class PainFormer(Module):
    def __init__(self, cfg: BackboneConfig | None = None, seed: int = 0, dtype=np.float32):
        cfg = cfg if cfg is not None else default_config()
        cfg.validate()
        self.cfg = cfg
        self.dtype = dtype
        rng = substream(seed, "backbone")
        d0 = cfg.stages[0].dim
        patch_in = cfg.patch_size * cfg.patch_size * cfg.in_channels
        self.patch_w = param(rng.standard_normal((patch_in, d0)) * 0.02, dtype=dtype)
        self.patch_b = param(np.zeros(d0), dtype=dtype)
        res_list = cfg.resolutions()
        self.stages = [Stage(s, r, cfg.mlp_ratio, rng, dtype)
                       for s, r in zip(cfg.stages, res_list)]
        self.down_w: list[Tensor] = []
        self.down_b: list[Tensor] = []
        for a, b in zip(cfg.stages[:-1], cfg.stages[1:]):
            self.down_w.append(param(rng.standard_normal((3, 3, a.dim, b.dim)) * 0.02, dtype=dtype))
            self.down_b.append(param(np.zeros(b.dim), dtype=dtype))

    @property
    def embed_dim(self) -> int:
        return self.cfg.stages[-1].dim

    def _check_images(self, images: np.ndarray) -> np.ndarray:
        images = np.asarray(images, dtype=self.dtype)
        if images.ndim == 3:
            images = images[None]
        require(images.ndim == 4, f"expected [B, H, W, C] or [H, W, C], got shape {images.shape}")
        want = (self.cfg.image_size, self.cfg.image_size, self.cfg.in_channels)
        require(images.shape[1:] == want, f"expected image shape {want}, got {images.shape[1:]}")
        require(np.all(np.isfinite(images)), "image contains non-finite values")
        return images

    def _patch_embed(self, images: np.ndarray) -> Tensor:
        b = images.shape[0]
        p = self.cfg.patch_size
        res = self.cfg.image_size // p
        c = self.cfg.in_channels
        x = ad.reshape(Tensor(images), (b, res, p, res, p, c))
        x = ad.transpose(x, (0, 1, 3, 2, 4, 5))
        x = ad.reshape(x, (b, res, res, p * p * c))
        return ad.add(ad.matmul(x, self.patch_w), self.patch_b)

    def embed(self, images: np.ndarray, capture: bool = False, droppath: float = 0.0,
              rng: np.random.Generator | None = None, return_trace: bool = False):
        """Map images [B, H, W, C] (or one [H, W, C]) to embeddings [B, d]
        (or [d]). `return_trace` also yields the grid shape after each stage."""
        arr = self._check_images(images)
        single = np.asarray(images).ndim == 3
        x = self._patch_embed(arr)
        trace: list[tuple[int, ...]] = []
        last = len(self.stages) - 1
        for i, stage in enumerate(self.stages):
            x = stage(x, capture and i == last, droppath, rng)
            trace.append(x.shape[1:])
            if i < last:
                x = ad.conv2d(x, self.down_w[i], self.down_b[i], stride=2, padding=1)
        emb = ad.mean_(x, axis=(1, 2))
        if single:
            emb = ad.reshape(emb, (self.embed_dim,))
        if return_trace:
            return emb, trace
        return emb

    def __call__(self, images: np.ndarray, **kw):
        return self.embed(images, **kw)


def painformer_forward(model: PainFormer, image: np.ndarray) -> np.ndarray:
    """Embedding for one image, eval mode, as a plain array."""
    return model.embed(image).data


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear interpolation of a 2-D map."""
    src = np.asarray(src, dtype=np.float64)
    require(src.ndim == 2, "bilinear_resize expects a 2-D map")
    h, w = src.shape
    ys = np.linspace(0.0, h - 1.0, out_h) if out_h > 1 else np.zeros(1)
    xs = np.linspace(0.0, w - 1.0, out_w) if out_w > 1 else np.zeros(1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    a = src[np.ix_(y0, x0)]
    b = src[np.ix_(y0, x1)]
    c = src[np.ix_(y1, x0)]
    d = src[np.ix_(y1, x1)]
    return (a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx
            + c * fy * (1 - fx) + d * fy * fx)


def attention_map(model: PainFormer, image: np.ndarray, head: int = 0) -> np.ndarray:
    """Where the final attention layer looks, upsampled onto the input.

    Takes the last attention layer of the last stage, averages the selected
    head's probabilities over queries, reshapes to the stage grid, and
    bilinearly interpolates to image size. Min-max normalized to [0, 1];
    a constant map (for example uniform attention) normalizes to all zeros.
    """
    last_stage = model.stages[-1]
    require(len(last_stage.attention) > 0, "final stage has no attention layers")
    heads = model.cfg.stages[-1].heads
    require(0 <= head < heads, f"head {head} out of range [0, {heads})")
    model.embed(image if np.asarray(image).ndim == 4 else np.asarray(image)[None], capture=True)
    probs = last_stage.attention[-1].last_attn    # [b, heads, n, n]
    res = last_stage.res
    grid = probs[0, head].mean(axis=0).reshape(res, res)
    up = bilinear_resize(grid, model.cfg.image_size, model.cfg.image_size)
    lo, hi = float(up.min()), float(up.max())
    if hi - lo <= 0.0:
        return np.zeros_like(up)
    return (up - lo) / (hi - lo)
