"""
Four ways to combine modalities
===============================

Given per-modality embeddings, the fusion module supports elementwise
addition, concatenation, probability averaging (decision fusion), and the
multimodal layout that keeps a biosignal embedding intact while compressing
three video streams through the video encoder.
"""

import numpy as np

from painformer.fusion import (decision_fusion, fuse_add, fuse_concat,
                               fuse_multimodal_biovid, unify_embeddings)
from painformer.heads import VideoEncoder

rng = np.random.default_rng(4)

# two 160-dim embeddings, say one from a spectrogram and one from a waveform
e_psd = rng.standard_normal(160)
e_wave = rng.standard_normal(160)

added = fuse_add(e_psd, e_wave)
stacked = fuse_concat([e_psd, e_wave])
print(f"add:    {added.shape}   concat: {stacked.shape}")

# decision fusion averages class probabilities from independent models
p_a = np.array([0.7, 0.2, 0.1])
p_b = np.array([0.3, 0.4, 0.3])
p = decision_fusion([p_a, p_b])
print(f"decision fusion: {np.round(p, 3)} -> class {int(np.argmax(p))}")

# the multimodal vector: 138 frame embeddings per video stream are unified
# into one flat vector, the three streams are summed and compressed to 40
# dims, and the biosignal embedding rides along untouched in positions 0-159
frames = rng.standard_normal((138, 160)).astype(np.float32)
unified = unify_embeddings(frames)
print(f"unified video stream: {frames.shape} -> {unified.shape}")

encoder = VideoEncoder(seed=0)
gsr = rng.standard_normal(160)
fused = fuse_multimodal_biovid(gsr, unified, unified, unified, encoder)
print(f"multimodal vector: {fused.shape}")
print(f"biosignal part intact: {bool(np.allclose(fused[:160], gsr))}")
print(f"video part: 160 + 40 = {fused.shape[0]}")
