"""Biosignal rasterization: turn 1-D physiological signals into 224x224 RGB
images the backbone can consume.

Four visualizations:
  waveform  - amplitude polyline, white stroke on black
  angle     - raw spectrogram phase angle, fixed [-pi, pi] color scale
  phase     - phase unwrapped along the frequency axis, min-max scaled
  psd       - power spectral density in dB, floored at -120, min-max scaled

Spectrogram kinds share one STFT (periodic Hann window, one-sided bins) and
are resampled to the output size with nearest-neighbor lookup, frequency low
at the bottom. Colors come from 256-entry lookup tables shipped as JSON data
(grayscale ramp by default, a warm "ember" table as the alternate).

Every step is integer-deterministic: fixed rounding (half away from zero),
fixed resampling, fixed color tables. Identical input bytes give identical
output bytes, which the stored image digests in the test suite rely on.
"""

from __future__ import annotations

import csv
import json
import struct
import zlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ContractError, require
from .fourier import fft

__all__ = [
    "Signal", "StftParams", "load_signal", "save_signal", "stft",
    "angle_matrix", "unwrapped_phase_matrix", "psd_matrix",
    "rasterize_waveform", "rasterize_spectrogram", "get_colormap",
    "write_image", "write_ppm", "write_png", "read_ppm",
    "IMAGE_SIZE", "MARGIN", "DB_FLOOR",
]

IMAGE_SIZE = 224
MARGIN = 8
DB_FLOOR = -120.0


# ------------------------------------------------------------------ signals

@dataclass
class Signal:
    samples: np.ndarray     # 1-D float64
    rate: float             # Hz
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        require(self.samples.size >= 1, "signal must have at least one sample")
        require(self.rate > 0, f"sampling rate must be positive, got {self.rate}")
        require(bool(np.all(np.isfinite(self.samples))), "signal contains non-finite samples")


def load_signal(path: str | Path, rate: float | None = None, label: str = "") -> Signal:
    """Read a signal from disk.

    *.csv: one value per row, optional single header line; the sampling rate
    must be passed in. Anything else is raw little-endian float32 with a
    JSON sidecar at <path>.json holding {"rate": ..., "label": ...}.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        require(rate is not None, "CSV input carries no rate, pass one explicitly")
        values: list[float] = []
        with open(path, newline="") as f:
            for i, row in enumerate(csv.reader(f)):
                if not row:
                    continue
                try:
                    values.append(float(row[0]))
                except ValueError:
                    require(i == 0, f"non-numeric value at row {i}: {row[0]!r}")
        require(len(values) >= 1, "CSV contained no samples")
        return Signal(np.array(values), float(rate), label)
    sidecar = path.with_name(path.name + ".json")
    require(sidecar.exists(), f"raw signal {path} is missing its sidecar {sidecar}")
    with open(sidecar) as f:
        meta = json.load(f)
    require("rate" in meta, "sidecar must define a rate")
    samples = np.fromfile(path, dtype="<f4").astype(np.float64)
    return Signal(samples, float(meta["rate"]), str(meta.get("label", label)))


def save_signal(sig: Signal, path: str | Path) -> None:
    """Write raw little-endian float32 plus the JSON sidecar."""
    path = Path(path)
    sig.samples.astype("<f4").tofile(path)
    with open(path.with_name(path.name + ".json"), "w") as f:
        json.dump({"rate": sig.rate, "label": sig.label}, f)


# --------------------------------------------------------------------- STFT

@dataclass(frozen=True)
class StftParams:
    window: int = 256
    hop: int = 64
    nfft: int = 256

    def validate(self) -> None:
        require(self.window >= 1 and self.hop >= 1 and self.nfft >= 1, "STFT sizes must be positive")
        require(self.window <= self.nfft, "window cannot exceed the FFT size")

    @staticmethod
    def default_for_rate(rate: float) -> "StftParams":
        # slower channels (e.g. 50 Hz optical signals) get a shorter window
        if rate < 128:
            return StftParams(window=64, hop=16, nfft=64)
        return StftParams(window=256, hop=64, nfft=256)


def hann_periodic(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft(samples: np.ndarray, params: StftParams) -> np.ndarray:
    """Short-time transform: complex [frames, nfft//2 + 1].

    frames = floor((len - window) / hop) + 1; a signal shorter than one
    window is zero-padded into a single frame.
    """
    params.validate()
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    win = params.window
    if x.size < win:
        x = np.pad(x, (0, win - x.size))
    n_frames = (x.size - win) // params.hop + 1
    w = hann_periodic(win)
    frames = np.empty((n_frames, params.nfft), dtype=np.float64)
    for i in range(n_frames):
        seg = x[i * params.hop: i * params.hop + win] * w
        frames[i, :win] = seg
        frames[i, win:] = 0.0
    spec = fft(frames.astype(np.complex128), axis=-1)
    return spec[:, : params.nfft // 2 + 1]


def angle_matrix(spec: np.ndarray) -> np.ndarray:
    """Phase angle per bin in [-pi, pi]; the 0/0 bin maps to angle 0."""
    return np.arctan2(spec.imag, spec.real)


def unwrapped_phase_matrix(spec: np.ndarray) -> np.ndarray:
    """Phase unwrapped along the frequency axis within each frame."""
    return np.unwrap(angle_matrix(spec), axis=-1)


def psd_matrix(spec: np.ndarray, params: StftParams, rate: float) -> np.ndarray:
    """Periodogram density |X|^2 / (rate * sum(w^2)), one-sided.

    Interior bins are doubled to keep total power: summing a column times
    the bin width rate/nfft recovers the signal power in that frame.
    """
    require(rate > 0, "rate must be positive")
    w = hann_periodic(params.window)
    denom = rate * float(np.sum(w * w))
    psd = (spec.real ** 2 + spec.imag ** 2) / denom
    bins = spec.shape[-1]
    interior_hi = bins - 1 if params.nfft % 2 == 0 else bins
    psd[:, 1:interior_hi] *= 2.0
    return psd


# ---------------------------------------------------------------- colormaps

_LUT_CACHE: dict[str, np.ndarray] = {}


def get_colormap(name: str = "grayscale") -> np.ndarray:
    """256-entry RGB lookup table, loaded from packaged JSON data."""
    if name not in _LUT_CACHE:
        ref = resources.files("painformer.data").joinpath(f"{name}.json")
        try:
            raw = ref.read_text()
        except FileNotFoundError:
            raise ContractError(f"unknown colormap {name!r}") from None
        lut = np.array(json.loads(raw), dtype=np.uint8)
        require(lut.shape == (256, 3), f"colormap {name!r} must be 256x3")
        _LUT_CACHE[name] = lut
    return _LUT_CACHE[name]


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(x) + 0.5).astype(np.int64)


def _minmax_to_index(m: np.ndarray) -> np.ndarray:
    """Min-max scale to LUT indices; a constant matrix maps to index 0."""
    lo = float(m.min())
    hi = float(m.max())
    if hi - lo <= 0.0:
        return np.zeros(m.shape, dtype=np.int64)
    return _round_half_up((m - lo) / (hi - lo) * 255.0)


def _angle_to_index(m: np.ndarray) -> np.ndarray:
    """Fixed mapping of [-pi, pi] onto 0..255 (no per-image scaling)."""
    return _round_half_up((m + np.pi) / (2.0 * np.pi) * 255.0)


def _nearest_resize(idx: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Floor-rule nearest lookup: source = floor(dst * src_size / dst_size)."""
    h, w = idx.shape
    rows = (np.arange(out_h) * h) // out_h
    cols = (np.arange(out_w) * w) // out_w
    return idx[np.ix_(rows, cols)]


# ---------------------------------------------------------------- rendering

def rasterize_waveform(samples: np.ndarray) -> np.ndarray:
    """Amplitude polyline as a 224x224 RGB image, white on black.

    Min-max normalized vertically inside an 8-pixel margin; a constant
    signal (zero range) sits on the midline, row 112. Consecutive sample
    points are joined with Bresenham segments.
    """
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    require(x.size >= 1, "need at least one sample")
    require(bool(np.all(np.isfinite(x))), "samples must be finite")
    lo, hi = float(x.min()), float(x.max())
    if hi - lo <= 0.0:
        norm = np.full(x.size, 0.5)
    else:
        norm = (x - lo) / (hi - lo)
    span = IMAGE_SIZE - 1 - 2 * MARGIN
    ys = MARGIN + _round_half_up((1.0 - norm) * span)
    if x.size == 1:
        xs = np.array([0], dtype=np.int64)
    else:
        xs = _round_half_up(np.arange(x.size) * (IMAGE_SIZE - 1) / (x.size - 1))
    img = np.zeros((IMAGE_SIZE, IMAGE_SIZE, 3), dtype=np.uint8)
    img[ys[0], xs[0]] = 255
    for i in range(x.size - 1):
        _draw_line(img, xs[i], ys[i], xs[i + 1], ys[i + 1])
    return img


def _draw_line(img: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> None:
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        img[y0, x0] = 255
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_spectrogram(samples: np.ndarray, rate: float, kind: str,
                          params: StftParams | None = None,
                          colormap: str = "grayscale") -> np.ndarray:
    """One STFT visualization as a 224x224 RGB image.

    kind: "angle" (fixed [-pi, pi] scale), "phase" (frequency-unwrapped,
    min-max scaled), or "psd" (dB with a -120 floor, min-max scaled).
    Time runs left to right, frequency bottom to top.
    """
    require(kind in ("angle", "phase", "psd"), f"unknown spectrogram kind {kind!r}")
    if params is None:
        params = StftParams.default_for_rate(rate)
    spec = stft(samples, params)
    if kind == "angle":
        idx = _angle_to_index(angle_matrix(spec))
    elif kind == "phase":
        idx = _minmax_to_index(unwrapped_phase_matrix(spec))
    else:
        psd = psd_matrix(spec, params, rate)
        db = 10.0 * np.log10(np.maximum(psd, 10.0 ** (DB_FLOOR / 10.0)))
        idx = _minmax_to_index(db)
    # [frames, bins] -> time on x, frequency low at the bottom
    idx = _nearest_resize(idx.T[::-1], IMAGE_SIZE, IMAGE_SIZE)
    return get_colormap(colormap)[idx]


# ----------------------------------------------------------------- image IO

def write_ppm(path: str | Path, pixels: np.ndarray) -> None:
    """Binary PPM (P6), 8-bit RGB, row-major top-down."""
    pixels = _check_pixels(pixels)
    h, w, _ = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())


def write_png(path: str | Path, pixels: np.ndarray) -> None:
    """Minimal 8-bit RGB PNG (single zlib-compressed IDAT, filter 0)."""
    pixels = _check_pixels(pixels)
    h, w, _ = pixels.shape
    raw = b"".join(b"\x00" + pixels[r].tobytes() for r in range(h))
    def chunk(tag: bytes, payload: bytes) -> bytes:
        body = tag + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body))
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    data = b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) \
        + chunk(b"IDAT", zlib.compress(raw, 9)) + chunk(b"IEND", b"")
    with open(path, "wb") as f:
        f.write(data)


def write_image(path: str | Path, pixels: np.ndarray) -> None:
    """Dispatch on extension: .png writes PNG, anything else PPM."""
    if Path(path).suffix.lower() == ".png":
        write_png(path, pixels)
    else:
        write_ppm(path, pixels)


def read_ppm(path: str | Path) -> np.ndarray:
    """Read binary PPM (P6) back into uint8 [h, w, 3]."""
    with open(path, "rb") as f:
        data = f.read()
    require(data[:2] == b"P6", "not a binary PPM file")
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1    # single whitespace after maxval
    w, h, maxval = fields
    require(maxval == 255, "only 8-bit PPM is supported")
    pixels = np.frombuffer(data[pos:pos + w * h * 3], dtype=np.uint8)
    require(pixels.size == w * h * 3, "truncated PPM payload")
    return pixels.reshape(h, w, 3).copy()


def _check_pixels(pixels: np.ndarray) -> np.ndarray:
    pixels = np.asarray(pixels)
    require(pixels.ndim == 3 and pixels.shape[2] == 3 and pixels.dtype == np.uint8,
            "image must be uint8 [h, w, 3]")
    return np.ascontiguousarray(pixels)
