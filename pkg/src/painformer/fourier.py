"""Hand-rolled DFT kernels.

Power-of-two lengths go through an iterative radix-2 Cooley-Tukey pass;
everything else is handled by Bluestein's chirp-z identity, which re-expresses
an arbitrary-length DFT as a circular convolution at a padded power-of-two
size. Forward transforms are unnormalized, inverses carry 1/N (1/(MN) in 2-D).

All kernels run in complex128 regardless of input dtype and are vectorized
over leading batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import require


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _fft_pow2(a: np.ndarray, rev: np.ndarray, sign: float) -> np.ndarray:
    """Radix-2 over the last axis. sign=-1 forward, +1 unnormalized inverse."""
    n = a.shape[-1]
    out = np.ascontiguousarray(a[..., rev], dtype=np.complex128)
    half = 1
    while half < n:
        step = 2 * half
        tw = np.exp(sign * 2j * np.pi * np.arange(half) / step)
        y = out.reshape(out.shape[:-1] + (n // step, step))
        e = y[..., :half]
        o = y[..., half:] * tw
        # write the second half first so `e` (a view) stays intact
        y[..., half:] = e - o
        y[..., :half] = e + o
        half = step
    return out


@dataclass(frozen=True)
class _Bluestein:
    pad: int             # power-of-two convolution length, >= 2n-1
    chirp: np.ndarray    # e^{-i pi k^2 / n}, length n
    kernel_f: np.ndarray # forward transform of the padded conjugate-chirp kernel
    rev: np.ndarray      # bit-reversal table for `pad`


def _make_bluestein(n: int) -> _Bluestein:
    k = np.arange(n, dtype=np.int64)
    # reduce k^2 mod 2n before dividing: keeps the phase argument small
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    pad = 1 << (2 * n - 1).bit_length()
    b = np.zeros(pad, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    if n > 1:
        b[-(n - 1):] = np.conj(chirp[1:])[::-1]
    rev = _bit_reverse_indices(pad)
    return _Bluestein(pad, chirp, _fft_pow2(b, rev, -1.0), rev)


@dataclass(frozen=True)
class AxisPlan:
    n: int
    twiddle: np.ndarray           # W^k = e^{-2 pi i k / n}, k = 0..n-1
    rev: np.ndarray | None        # set when n is a power of two
    blue: _Bluestein | None       # set otherwise


def _make_axis(n: int) -> AxisPlan:
    require(n >= 1, f"transform length must be positive, got {n}")
    twiddle = np.exp(-2j * np.pi * np.arange(n) / n)
    if n & (n - 1) == 0:
        return AxisPlan(n, twiddle, _bit_reverse_indices(n), None)
    return AxisPlan(n, twiddle, None, _make_bluestein(n))


def _dft_last_axis(a: np.ndarray, plan: AxisPlan) -> np.ndarray:
    n = plan.n
    if n == 1:
        return a.astype(np.complex128, copy=True)
    if plan.rev is not None:
        return _fft_pow2(a, plan.rev, -1.0)
    blue = plan.blue
    buf = np.zeros(a.shape[:-1] + (blue.pad,), dtype=np.complex128)
    buf[..., :n] = a * blue.chirp
    conv = _fft_pow2(_fft_pow2(buf, blue.rev, -1.0) * blue.kernel_f, blue.rev, 1.0) / blue.pad
    return conv[..., :n] * blue.chirp


class FourierPlan:
    """Precomputed tables for a fixed (rows, cols) grid size."""

    def __init__(self, rows: int, cols: int):
        self.rows = _make_axis(rows)
        self.cols = _make_axis(cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows.n, self.cols.n)


_PLAN_CACHE: dict[tuple[int, int], FourierPlan] = {}


def plan_for(rows: int, cols: int) -> FourierPlan:
    key = (rows, cols)
    if key not in _PLAN_CACHE:
        _PLAN_CACHE[key] = FourierPlan(rows, cols)
    return _PLAN_CACHE[key]


_AXIS_CACHE: dict[int, AxisPlan] = {}


def _axis_for(n: int) -> AxisPlan:
    if n not in _AXIS_CACHE:
        _AXIS_CACHE[n] = _make_axis(n)
    return _AXIS_CACHE[n]


def _apply(x: np.ndarray, axis: int, plan: AxisPlan, inverse: bool) -> np.ndarray:
    moved = np.moveaxis(np.asarray(x), axis, -1)
    if inverse:
        out = np.conj(_dft_last_axis(np.conj(moved), plan)) / plan.n
    else:
        out = _dft_last_axis(moved, plan)
    return np.moveaxis(out, -1, axis)


def fft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalized forward DFT along one axis."""
    return _apply(x, axis, _axis_for(np.asarray(x).shape[axis]), inverse=False)


def ifft(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse DFT along one axis, normalized by 1/n."""
    return _apply(x, axis, _axis_for(np.asarray(x).shape[axis]), inverse=True)


def _check_plan(x: np.ndarray, plan: FourierPlan, axes: tuple[int, int]) -> None:
    got = (x.shape[axes[0]], x.shape[axes[1]])
    require(got == plan.shape, f"plan is for grid {plan.shape}, input grid is {got}")


def fft2(x: np.ndarray, plan: FourierPlan | None = None, axes: tuple[int, int] = (-2, -1)) -> np.ndarray:
    """Unnormalized forward 2-D DFT over the given axes."""
    x = np.asarray(x)
    if plan is None:
        plan = plan_for(x.shape[axes[0]], x.shape[axes[1]])
    _check_plan(x, plan, axes)
    return _apply(_apply(x, axes[0], plan.rows, False), axes[1], plan.cols, False)


def ifft2(x: np.ndarray, plan: FourierPlan | None = None, axes: tuple[int, int] = (-2, -1)) -> np.ndarray:
    """Inverse 2-D DFT over the given axes, normalized by 1/(rows*cols)."""
    x = np.asarray(x)
    if plan is None:
        plan = plan_for(x.shape[axes[0]], x.shape[axes[1]])
    _check_plan(x, plan, axes)
    return _apply(_apply(x, axes[0], plan.rows, True), axes[1], plan.cols, True)
