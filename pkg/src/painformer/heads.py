"""Latent cross-attention heads that consume backbone embeddings.

Both heads follow the same recipe: a fixed-size set of learned latent
vectors queries the input tokens through cross-attention, so compute stays
constant no matter how many tokens come in, and the pooled latents are
projected to the output width.

EmbeddingMixer fuses a variable-length set of 160-dim embeddings into one
512-dim vector (plus classification logits): two layers, each one
cross-attention block followed by two self-attention blocks over the
latents. VideoEncoder compresses a 22080-dim unified video embedding
(138 tokens of 160) into 40 dims with a single cross-attention layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, param
from .backbone import AttentionLayer, LayerNorm, Linear, Mlp, Module
from .errors import require
from .rng import substream

__all__ = [
    "MixerConfig", "VideoEncoderConfig", "CrossAttentionBlock",
    "EmbeddingMixer", "VideoEncoder",
]


@dataclass(frozen=True)
class MixerConfig:
    input_dim: int = 160
    latent_dim: int = 384
    latents: int = 256
    layers: int = 2
    self_blocks: int = 2
    cross_heads: int = 1
    self_heads: int = 8
    output_dim: int = 512
    classes: int = 2
    mlp_ratio: int = 4

    def validate(self) -> None:
        require(self.latent_dim % max(self.cross_heads, 1) == 0
                and self.latent_dim % max(self.self_heads, 1) == 0,
                "latent width must divide evenly across heads")
        require(min(self.input_dim, self.latent_dim, self.latents, self.layers,
                    self.output_dim, self.classes) > 0, "all sizes must be positive")


@dataclass(frozen=True)
class VideoEncoderConfig:
    input_dim: int = 160
    tokens: int = 138
    latent_dim: int = 512
    latents: int = 256
    cross_heads: int = 1
    output_dim: int = 40
    mlp_ratio: int = 4

    def validate(self) -> None:
        require(self.latent_dim % max(self.cross_heads, 1) == 0,
                "latent width must divide evenly across heads")
        require(min(self.input_dim, self.tokens, self.latent_dim, self.latents,
                    self.output_dim) > 0, "all sizes must be positive")


class CrossAttentionBlock(Module):
    """Latents attend to input tokens: pre-norm on both sides, projections
    without bias, residual on the latents, then a pre-norm MLP residual."""

    def __init__(self, latent_dim: int, input_dim: int, heads: int, ratio: int,
                 rng: np.random.Generator, dtype=np.float32):
        require(latent_dim % heads == 0, f"latent dim {latent_dim} not divisible by {heads} heads")
        self.heads = heads
        self.norm_q = LayerNorm(latent_dim, dtype)
        self.norm_kv = LayerNorm(input_dim, dtype)
        self.wq = param(rng.standard_normal((latent_dim, latent_dim)) * 0.02, dtype=dtype)
        self.wk = param(rng.standard_normal((input_dim, latent_dim)) * 0.02, dtype=dtype)
        self.wv = param(rng.standard_normal((input_dim, latent_dim)) * 0.02, dtype=dtype)
        self.wo = param(rng.standard_normal((latent_dim, latent_dim)) * 0.02, dtype=dtype)
        self.norm2 = LayerNorm(latent_dim, dtype)
        self.mlp = Mlp(latent_dim, ratio, rng, depthwise=False, dtype=dtype)

    def _cross(self, latents: Tensor, tokens: Tensor) -> Tensor:
        b, m, ld = latents.shape
        n = tokens.shape[1]
        h = self.heads
        dh = ld // h
        q = ad.matmul(self.norm_q(latents), self.wq)
        k = ad.matmul(self.norm_kv(tokens), self.wk)
        v = ad.matmul(self.norm_kv(tokens), self.wv)
        def split(t: Tensor, length: int) -> Tensor:
            return ad.transpose(ad.reshape(t, (b, length, h, dh)), (0, 2, 1, 3))
        q, k, v = split(q, m), split(k, n), split(v, n)
        scores = ad.scale(ad.matmul(q, ad.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
        out = ad.matmul(ad.softmax_rows(scores), v)
        out = ad.reshape(ad.transpose(out, (0, 2, 1, 3)), (b, m, ld))
        return ad.matmul(out, self.wo)

    def __call__(self, latents: Tensor, tokens: Tensor) -> Tensor:
        latents = ad.add(latents, self._cross(latents, tokens))
        return ad.add(latents, self.mlp(self.norm2(latents)))


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


class EmbeddingMixer(Module):
    def __init__(self, cfg: MixerConfig | None = None, seed: int = 0, dtype=np.float32):
        cfg = cfg if cfg is not None else MixerConfig()
        cfg.validate()
        self.cfg = cfg
        rng = substream(seed, "mixer")
        self.latents = param(rng.standard_normal((cfg.latents, cfg.latent_dim)) * 0.02, dtype=dtype)
        self.blocks = []
        for _ in range(cfg.layers):
            layer = [CrossAttentionBlock(cfg.latent_dim, cfg.input_dim, cfg.cross_heads,
                                         cfg.mlp_ratio, rng, dtype)]
            layer += [AttentionLayer(cfg.latent_dim, cfg.self_heads, cfg.mlp_ratio, rng, dtype)
                      for _ in range(cfg.self_blocks)]
            self.blocks.append(layer)
        self.out = Linear(cfg.latent_dim, cfg.output_dim, rng, dtype=dtype)
        self.classifier = Linear(cfg.output_dim, cfg.classes, rng, dtype=dtype)

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {prefix + "latents": self.latents}
        for i, layer in enumerate(self.blocks):
            for j, block in enumerate(layer):
                out.update(block.named_parameters(f"{prefix}blocks.{i}.{j}."))
        out.update(self.out.named_parameters(prefix + "out."))
        out.update(self.classifier.named_parameters(prefix + "classifier."))
        return out

    def forward(self, tokens) -> tuple[Tensor, Tensor]:
        """tokens: [n, input_dim], any n >= 1. Returns (embedding, logits)."""
        t = _as_tensor(tokens)
        require(len(t.shape) == 2 and t.shape[1] == self.cfg.input_dim,
                f"expected [n, {self.cfg.input_dim}] tokens, got {t.shape}")
        toks = ad.reshape(t, (1,) + t.shape)
        z = ad.reshape(self.latents, (1,) + tuple(self.latents.shape))
        for layer in self.blocks:
            cross = layer[0]
            z = cross(z, toks)
            for block in layer[1:]:
                z = block(z)
        pooled = ad.mean_(z, axis=1)                     # [1, latent_dim]
        emb = self.out(pooled)
        logits = self.classifier(emb)
        return (ad.reshape(emb, (self.cfg.output_dim,)),
                ad.reshape(logits, (self.cfg.classes,)))

    def __call__(self, tokens) -> tuple[Tensor, Tensor]:
        return self.forward(tokens)


class VideoEncoder(Module):
    def __init__(self, cfg: VideoEncoderConfig | None = None, seed: int = 0, dtype=np.float32):
        cfg = cfg if cfg is not None else VideoEncoderConfig()
        cfg.validate()
        self.cfg = cfg
        rng = substream(seed, "video-encoder")
        self.latents = param(rng.standard_normal((cfg.latents, cfg.latent_dim)) * 0.02, dtype=dtype)
        self.pos = param(rng.standard_normal((cfg.tokens, cfg.input_dim)) * 0.02, dtype=dtype)
        self.cross = CrossAttentionBlock(cfg.latent_dim, cfg.input_dim, cfg.cross_heads,
                                         cfg.mlp_ratio, rng, dtype)
        self.out = Linear(cfg.latent_dim, cfg.output_dim, rng, dtype=dtype)

    def forward(self, unified) -> Tensor:
        """unified: flat [tokens * input_dim] vector. Returns [output_dim]."""
        v = _as_tensor(unified)
        want = self.cfg.tokens * self.cfg.input_dim
        require(len(v.shape) == 1 and v.shape[0] == want,
                f"expected a flat [{want}] vector, got {v.shape}")
        toks = ad.add(ad.reshape(v, (self.cfg.tokens, self.cfg.input_dim)), self.pos)
        toks = ad.reshape(toks, (1,) + tuple(toks.shape))
        z = ad.reshape(self.latents, (1,) + tuple(self.latents.shape))
        z = self.cross(z, toks)
        pooled = ad.mean_(z, axis=1)
        return ad.reshape(self.out(pooled), (self.cfg.output_dim,))

    def __call__(self, unified) -> Tensor:
        return self.forward(unified)
