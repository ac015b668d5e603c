"""Spectral-gated hierarchical transformer for physiological signal embeddings.

Pure numpy/scipy implementation: a small reverse-mode autodiff tape, hand
rolled FFT kernels, the four-stage backbone, latent cross-attention heads,
biosignal rasterization, embedding fusion, and a multi-task training harness.
"""

__version__ = "0.1.0"
