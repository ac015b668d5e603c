"""Combining embeddings across frames, modalities, and models.

Frame embeddings concatenate into one unified vector (order preserved, 138
frames of 160 dims = 22080). Video modalities are summed in unified space,
compressed to 40 dims by a VideoEncoder, and concatenated after the 160-dim
GSR embedding to the 200-dim multimodal vector. Same-width embeddings fuse
by elementwise sum; classifier outputs fuse at the decision level by
averaging probability vectors.

Also here: the two embedding-space augmentations, whole-vector polarity
flips with additive Gaussian noise, and contiguous span masking covering
10 to 20 percent of the dimensions.
"""

from __future__ import annotations

import numpy as np

from .errors import require
from .heads import VideoEncoder

__all__ = [
    "unify_embeddings", "fuse_add", "fuse_concat", "fuse_multimodal_biovid",
    "decision_fusion", "augment_basic", "augment_masking",
]


def unify_embeddings(embeddings: np.ndarray) -> np.ndarray:
    """Concatenate frame embeddings [m, d] into one [m*d] vector.

    Embedding i lands in slice [i*d, (i+1)*d); order is preserved.
    """
    e = np.asarray(embeddings)
    require(e.ndim == 2 and e.shape[0] >= 1, f"expected [m, d] embeddings, got {e.shape}")
    return e.reshape(-1).copy()


def fuse_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise sum of two same-width embeddings."""
    a = np.asarray(a)
    b = np.asarray(b)
    require(a.shape == b.shape and a.ndim == 1,
            f"sum fusion needs matching 1-D vectors, got {a.shape} and {b.shape}")
    return a + b


def fuse_concat(parts: list[np.ndarray]) -> np.ndarray:
    """Concatenate 1-D embeddings in the given order."""
    require(len(parts) >= 1, "nothing to concatenate")
    arrs = [np.asarray(p) for p in parts]
    for p in arrs:
        require(p.ndim == 1, "concat fusion expects 1-D vectors")
    return np.concatenate(arrs)


def fuse_multimodal_biovid(gsr: np.ndarray, rgb: np.ndarray, thermal: np.ndarray,
                           depth: np.ndarray, encoder: VideoEncoder) -> np.ndarray:
    """GSR embedding followed by the encoded sum of the three video streams.

    The video unified vectors are summed elementwise, compressed by the
    encoder, and appended: output[0:len(gsr)] is the GSR embedding
    untouched, the encoder output fills the tail.
    """
    gsr = np.asarray(gsr)
    require(gsr.ndim == 1, "GSR embedding must be 1-D")
    want = encoder.cfg.tokens * encoder.cfg.input_dim
    streams = [np.asarray(v) for v in (rgb, thermal, depth)]
    for v in streams:
        require(v.shape == (want,), f"video stream must be a flat [{want}] vector, got {v.shape}")
    summed = streams[0] + streams[1] + streams[2]
    encoded = encoder(summed).data
    return np.concatenate([gsr, encoded])


def decision_fusion(probs: list[np.ndarray], tol: float = 1e-6) -> np.ndarray:
    """Average probability vectors from multiple classifiers.

    Each input must be a distribution (nonnegative, sums to 1 within tol);
    the mean is then a distribution too. Averaging is order-invariant.
    """
    require(len(probs) >= 1, "need at least one probability vector")
    arrs = [np.asarray(p, dtype=np.float64) for p in probs]
    k = arrs[0].shape
    for p in arrs:
        require(p.ndim == 1 and p.shape == k, "probability vectors must share one 1-D shape")
        require(bool(np.all(p >= -tol)), "probabilities must be nonnegative")
        require(abs(float(p.sum()) - 1.0) <= tol, f"probabilities must sum to 1, got {p.sum()}")
    return np.mean(arrs, axis=0)


def augment_basic(emb: np.ndarray, rng: np.random.Generator,
                  flip_prob: float = 0.5, noise_std: float | None = None) -> np.ndarray:
    """Whole-vector polarity flip plus additive Gaussian noise.

    noise_std defaults to 0.05 times the embedding's own standard deviation,
    so the perturbation scales with the embedding; pass an absolute value to
    override, 0.0 for a pure flip.
    """
    e = np.asarray(emb, dtype=np.float64)
    require(e.ndim == 1, "expected a 1-D embedding")
    require(0.0 <= flip_prob <= 1.0, "flip_prob must lie in [0, 1]")
    if noise_std is None:
        noise_std = 0.05 * float(e.std())
    out = -e if rng.random() < flip_prob else e.copy()
    if noise_std > 0.0:
        out = out + rng.normal(0.0, noise_std, size=e.shape)
    return out


def augment_masking(emb: np.ndarray, rng: np.random.Generator,
                    lo: float = 0.10, hi: float = 0.20) -> np.ndarray:
    """Zero one contiguous span covering between lo and hi of the dims.

    Span length is uniform on [ceil(lo*d), floor(hi*d)], start uniform over
    all positions where the span fits.
    """
    e = np.asarray(emb, dtype=np.float64).copy()
    require(e.ndim == 1, "expected a 1-D embedding")
    require(0.0 < lo <= hi < 1.0, "need 0 < lo <= hi < 1")
    d = e.size
    lmin = int(np.ceil(lo * d))
    lmax = int(np.floor(hi * d))
    require(1 <= lmin <= lmax, f"span bounds [{lmin}, {lmax}] are empty for {d} dims")
    length = int(rng.integers(lmin, lmax + 1))
    start = int(rng.integers(0, d - length + 1))
    e[start: start + length] = 0.0
    return e
