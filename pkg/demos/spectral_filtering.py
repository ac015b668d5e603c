"""
Spectral token mixing
=====================

A spectral layer moves a token grid into the frequency domain, multiplies
by a learnable complex filter, and comes back. Two facts are easy to see
at desk scale: a unit filter is a no-op, and shrinking the high-frequency
filter entries smooths the grid.
"""

import numpy as np

from painformer.autodiff import Tensor
from painformer.backbone import SpectralLayer
from painformer.fourier import fft2

rng = np.random.default_rng(0)
res, d = 8, 4
x = rng.standard_normal((res, res, d))

layer = SpectralLayer(res=res, d=d, ratio=4, rng=rng, dtype=np.float64)

# unit filter: the gate path reproduces its input
layer.filter_re.data = np.ones_like(layer.filter_re.data)
layer.filter_im.data = np.zeros_like(layer.filter_im.data)
out = layer.gate(Tensor(x)).data
print(f"unit filter max deviation:  {np.max(np.abs(out - x)):.2e}")

# low-pass filter: keep the four lowest spatial frequencies per axis,
# zero the rest, and watch the grid get smoother
keep = np.zeros((res, res, 1))
for u in range(res):
    for v in range(res):
        fu = min(u, res - u)    # frequency folds around the Nyquist row
        fv = min(v, res - v)
        keep[u, v, 0] = 1.0 if fu < 2 and fv < 2 else 0.0
layer.filter_re.data = np.broadcast_to(keep, layer.filter_re.data.shape).copy()
smooth = layer.gate(Tensor(x)).data

def roughness(grid):
    # mean squared difference between horizontally adjacent tokens
    return float(np.mean((grid[:, 1:] - grid[:, :-1]) ** 2))

print(f"roughness before: {roughness(x):.3f}")
print(f"roughness after:  {roughness(smooth):.3f}")

# the retained energy matches the retained coefficients (Parseval)
spec = fft2(x[..., 0])
kept_energy = float(np.sum(np.abs(spec * keep[..., 0]) ** 2))
total_energy = float(np.sum(np.abs(spec) ** 2))
out_energy = float(np.sum(smooth[..., 0] ** 2)) * res * res
print(f"kept spectral energy: {kept_energy / total_energy:.1%} of the original")
print(f"output energy check:  {out_energy / kept_energy:.6f} (should be 1)")
