"""
Backbone walkthrough
====================

Builds the full-size backbone, pushes one image through it, and prints
the grid shape after every stage together with the parameter budget of
each module. Early stages mix tokens spectrally, later stages attend.
"""

import time

import numpy as np

from painformer.backbone import PainFormer, default_config, parameter_count
from painformer.heads import EmbeddingMixer, VideoEncoder

cfg = default_config()
print("stage plan (spectral, attention, heads, dim):")
for i, s in enumerate(cfg.stages):
    print(f"  stage {i}: ({s.spectral_layers}, {s.attention_layers}, "
          f"{s.heads}, {s.dim})")

model = PainFormer(cfg, seed=0)
image = np.random.default_rng(1).random((224, 224, 3), dtype=np.float32)

t0 = time.monotonic()
emb, trace = model.embed(image, return_trace=True)
dt = time.monotonic() - t0

print("\ngrid after each stage:")
print(f"  input    224x224x3")
for i, shape in enumerate(trace):
    h, w, c = shape
    print(f"  stage {i}: {h}x{w}x{c}")
print(f"  pooled   {emb.shape[0]} dims ({dt:.2f}s on one cpu core)")

print("\nparameter budgets:")
for name, module, ref in (("backbone", model, 19.60),
                          ("embedding-mixer", EmbeddingMixer(seed=0), 9.85),
                          ("video-encoder", VideoEncoder(seed=0), 3.37)):
    n = parameter_count(module)
    print(f"  {name:16s} {n:>12,d}   reference {ref:.2f}M")
