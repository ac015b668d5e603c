"""
Rendering biosignals as images
==============================

The imaging module turns a 1-D signal into fixed-size pictures: the raw
waveform and three spectrogram views (power density, wrapped angle,
unwrapped phase). This script renders a two-tone test signal with a slow
drift, the kind of structure a skin-conductance trace might show.
"""

from pathlib import Path

import numpy as np

from painformer.imaging import StftParams, rasterize_spectrogram, rasterize_waveform, write_image

out_dir = Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)

rate = 512.0
t = np.arange(8 * int(rate)) / rate
signal = (np.sin(2 * np.pi * 8.0 * t)                    # steady 8 Hz tone
          + 0.5 * np.sin(2 * np.pi * 40.0 * t) * (t > 4)  # 40 Hz burst in the back half
          + 0.2 * t)                                      # slow drift

params = StftParams(window=256, hop=64, nfft=256)
views = {
    "waveform": rasterize_waveform(signal),
    "psd": rasterize_spectrogram(signal, rate, "psd", params),
    "angle": rasterize_spectrogram(signal, rate, "angle", params),
    "phase": rasterize_spectrogram(signal, rate, "phase", params),
}

for name, pixels in views.items():
    path = out_dir / f"twotone-{name}.png"
    write_image(path, pixels)
    print(f"{name:8s} -> {path}  {pixels.shape[1]}x{pixels.shape[0]}")

# the psd view should light up two horizontal bands: bin 4 (8 Hz) across
# the full width and bin 20 (40 Hz) only on the right half
print("\nbins: 8 Hz -> bin", int(8 / (rate / params.nfft)),
      ", 40 Hz -> bin", int(40 / (rate / params.nfft)))
