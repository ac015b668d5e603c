"""Reverse-mode autodiff over numpy arrays.

A Tensor wraps an ndarray plus a closure that routes upstream gradients to
its parents. backward() topologically sorts the graph once and walks it in
reverse. Dtype follows the data: build models in float32 for speed or
float64 for gradient checks.

Complex tensors carry gradients under the convention
    g = dL/d(Re z) + i * dL/d(Im z)
so for any C-linear op with matrix A the adjoint is simply A^H. That gives
the DFT pair the clean rules
    fft2 backward:  g_in = M*N * ifft2(g_out)
    ifft2 backward: g_in = fft2(g_out) / (M*N)
and elementwise complex product the conjugate rule g_a = conj(b) * g_out.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

from . import fourier
from .errors import require

__all__ = [
    "Tensor", "param", "add", "sub", "neg", "mul", "scale", "matmul",
    "reshape", "transpose", "pad_hw", "slice_", "concat", "sum_", "mean_",
    "exp_", "log_", "logsumexp", "gelu", "elu", "softmax_rows", "layer_norm",
    "to_complex", "real_", "imag_", "cmul", "fft2", "ifft2",
    "conv2d", "depthwise_conv2d", "finite_diff_grad",
]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bwd")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.asarray(data, dtype=dtype)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._bwd: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def backward(self) -> None:
        require(self.data.size == 1, "backward() needs a scalar root")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        for node in order:
            node.grad = None
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._bwd is not None and node.grad is not None:
                node._bwd(node.grad)

    # sugar for model code
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    def __rmul__(self, other):
        return scale(self, float(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean_(self, axis, keepdims)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


def param(data, dtype=None) -> Tensor:
    return Tensor(data, requires_grad=True, dtype=dtype)


def _node(data: np.ndarray, parents: Sequence[Tensor], bwd: Callable[[np.ndarray], None] | None) -> Tensor:
    out = Tensor(data)
    out.requires_grad = any(p.requires_grad for p in parents)
    if out.requires_grad:
        out._parents = tuple(parents)
        out._bwd = bwd
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    g = np.asarray(g)
    if t.grad is None:
        t.grad = np.array(g, dtype=t.data.dtype)
    else:
        t.grad += g.astype(t.data.dtype, copy=False)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(g.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------- arithmetic

def add(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))
    return _node(a.data + b.data, (a, b), bwd)


def sub(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, -_unbroadcast(g, b.shape))
    return _node(a.data - b.data, (a, b), bwd)


def neg(a: Tensor) -> Tensor:
    return _node(-a.data, (a,), lambda g: _accum(a, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of real tensors (broadcasting). Complex goes through cmul."""
    require(not np.iscomplexobj(a.data) and not np.iscomplexobj(b.data),
            "mul is real-only, use cmul for complex factors")
    def bwd(g):
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))
    return _node(a.data * b.data, (a, b), bwd)


def scale(a: Tensor, s: float) -> Tensor:
    return _node(a.data * s, (a,), lambda g: _accum(a, g * s))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """a @ b where b is 2-D (shared weights) or both carry equal batch dims."""
    require(a.data.ndim >= 2 and b.data.ndim >= 2, "matmul needs >=2-D operands")
    def bwd(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        _accum(a, _unbroadcast(ga, a.shape))
        if b.data.ndim == 2:
            k = a.shape[-1]
            m = g.shape[-1]
            gb = a.data.reshape(-1, k).T @ g.reshape(-1, m)
        else:
            gb = _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape)
        _accum(b, gb)
    return _node(a.data @ b.data, (a, b), bwd)


# -------------------------------------------------------------- shape moves

def reshape(a: Tensor, shape) -> Tensor:
    old = a.shape
    return _node(a.data.reshape(shape), (a,), lambda g: _accum(a, g.reshape(old)))


def transpose(a: Tensor, axes: tuple[int, ...]) -> Tensor:
    inv = np.argsort(axes)
    return _node(a.data.transpose(axes), (a,), lambda g: _accum(a, g.transpose(inv)))


def pad_hw(a: Tensor, ph: int, pw: int) -> Tensor:
    """Zero-pad the two spatial axes of a [..., h, w, d] grid."""
    require(a.data.ndim >= 3, "pad_hw expects [..., h, w, d]")
    width = [(0, 0)] * a.data.ndim
    width[-3] = (ph, ph)
    width[-2] = (pw, pw)
    def bwd(g):
        key = [slice(None)] * g.ndim
        key[-3] = slice(ph, g.shape[-3] - ph)
        key[-2] = slice(pw, g.shape[-2] - pw)
        _accum(a, g[tuple(key)])
    return _node(np.pad(a.data, width), (a,), bwd)


def slice_(a: Tensor, key) -> Tensor:
    def bwd(g):
        full = np.zeros(a.shape, dtype=g.dtype)
        full[key] = g
        _accum(a, full)
    return _node(a.data[key], (a,), bwd)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)
    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            key = [slice(None)] * g.ndim
            key[axis] = slice(lo, hi)
            _accum(t, g[tuple(key)])
    return _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), bwd)


# --------------------------------------------------------------- reductions

def sum_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.shape))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.shape))
    return _node(a.data.sum(axis=axis, keepdims=keepdims), (a,), bwd)


def mean_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        count = a.data.size
    else:
        ax = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[i] for i in ax]))
    def bwd(g):
        if axis is None:
            _accum(a, np.broadcast_to(g / count, a.shape))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g / count, a.shape))
    return _node(a.data.mean(axis=axis, keepdims=keepdims), (a,), bwd)


# ------------------------------------------------------------ nonlinearities

def exp_(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)
    return _node(out_data, (a,), lambda g: _accum(a, g * out_data))


def log_(a: Tensor) -> Tensor:
    return _node(np.log(a.data), (a,), lambda g: _accum(a, g / a.data))


def logsumexp(a: Tensor) -> Tensor:
    """log sum exp over the last axis, computed with a max shift."""
    m = a.data.max(axis=-1, keepdims=True)
    e = np.exp(a.data - m)
    s = e.sum(axis=-1, keepdims=True)
    out_data = (m + np.log(s)).squeeze(-1)
    soft = e / s
    return _node(out_data, (a,), lambda g: _accum(a, g[..., None] * soft))


_INV_SQRT2 = float(1.0 / np.sqrt(2.0))
_INV_SQRT2PI = float(1.0 / np.sqrt(2.0 * np.pi))


def gelu(a: Tensor) -> Tensor:
    """x * Phi(x) with the exact Gaussian CDF."""
    cdf = 0.5 * (1.0 + erf(a.data * _INV_SQRT2))
    def bwd(g):
        pdf = np.exp(-0.5 * a.data * a.data) * _INV_SQRT2PI
        _accum(a, g * (cdf + a.data * pdf))
    return _node(a.data * cdf, (a,), bwd)


def elu(a: Tensor) -> Tensor:
    """x for x > 0, exp(x) - 1 otherwise."""
    pos = a.data > 0
    ex = np.exp(np.minimum(a.data, 0.0))
    out_data = np.where(pos, a.data, ex - 1.0)
    return _node(out_data, (a,), lambda g: _accum(a, g * np.where(pos, 1.0, ex)))


def softmax_rows(a: Tensor) -> Tensor:
    """Softmax over the last axis, max-shifted for stability."""
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=-1, keepdims=True)
    def bwd(g):
        inner = (g * s).sum(axis=-1, keepdims=True)
        _accum(a, s * (g - inner))
    return _node(s, (a,), bwd)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance, then scale and shift.

    Uses the biased variance. A zero-variance row maps to beta exactly
    (x_hat is 0 there up to eps damping), which downstream zero-propagation
    tests rely on.
    """
    d = x.shape[-1]
    require(gamma.shape == (d,) and beta.shape == (d,), "layer_norm scale/shift must match the last axis")
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    def bwd(g):
        batch_axes = tuple(range(g.ndim - 1))
        _accum(gamma, (g * xhat).sum(axis=batch_axes))
        _accum(beta, g.sum(axis=batch_axes))
        gh = g * gamma.data
        m1 = gh.mean(axis=-1, keepdims=True)
        m2 = (gh * xhat).mean(axis=-1, keepdims=True)
        _accum(x, inv * (gh - m1 - xhat * m2))
    return _node(xhat * gamma.data + beta.data, (x, gamma, beta), bwd)


# ------------------------------------------------------------- complex ops

def to_complex(re: Tensor, im: Tensor) -> Tensor:
    require(re.shape == im.shape, "real and imaginary parts must share a shape")
    ctype = np.complex128 if re.data.dtype == np.float64 else np.complex64
    def bwd(g):
        _accum(re, np.real(g))
        _accum(im, np.imag(g))
    return _node((re.data + 1j * im.data).astype(ctype), (re, im), bwd)


def real_(a: Tensor) -> Tensor:
    return _node(np.real(a.data).copy(), (a,), lambda g: _accum(a, g.astype(a.data.dtype)))


def imag_(a: Tensor) -> Tensor:
    return _node(np.imag(a.data).copy(), (a,), lambda g: _accum(a, 1j * g.astype(a.data.dtype)))


def cmul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise complex product. Adjoint multiplies by the conjugate factor."""
    def bwd(g):
        _accum(a, _unbroadcast(np.conj(b.data) * g, a.shape))
        _accum(b, _unbroadcast(np.conj(a.data) * g, b.shape))
    return _node(a.data * b.data, (a, b), bwd)


def fft2(a: Tensor, axes: tuple[int, int] = (-3, -2)) -> Tensor:
    """Unnormalized forward 2-D DFT over `axes` (defaults to the spatial axes
    of a [..., h, w, d] grid)."""
    m = a.shape[axes[0]]
    n = a.shape[axes[1]]
    plan = fourier.plan_for(m, n)
    ctype = a.data.dtype if np.iscomplexobj(a.data) else np.complex128
    def bwd(g):
        _accum(a, (m * n) * fourier.ifft2(g, plan, axes))
    return _node(fourier.fft2(a.data, plan, axes).astype(ctype), (a,), bwd)


def ifft2(a: Tensor, axes: tuple[int, int] = (-3, -2)) -> Tensor:
    """Inverse 2-D DFT over `axes`, normalized by 1/(MN)."""
    m = a.shape[axes[0]]
    n = a.shape[axes[1]]
    plan = fourier.plan_for(m, n)
    ctype = a.data.dtype if np.iscomplexobj(a.data) else np.complex128
    def bwd(g):
        _accum(a, fourier.fft2(g, plan, axes) / (m * n))
    return _node(fourier.ifft2(a.data, plan, axes).astype(ctype), (a,), bwd)


# ------------------------------------------------------------- convolutions

def _conv_out_len(size: int, k: int, pad: int, stride: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def conv2d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 1, padding: int = 0) -> Tensor:
    """2-D convolution on [..., h, w, c_in] with kernel [k, k, c_in, c_out].

    Output spatial size is floor((n + 2p - k) / s) + 1. Built from pad,
    strided slices, and matmul so the adjoint falls out of the primitives.
    """
    k = w.shape[0]
    require(w.shape[1] == k, "kernel must be square")
    require(x.shape[-1] == w.shape[2], "input channels must match the kernel")
    h, wd = x.shape[-3], x.shape[-2]
    oh = _conv_out_len(h, k, padding, stride)
    ow = _conv_out_len(wd, k, padding, stride)
    require(oh >= 1 and ow >= 1, "kernel does not fit the padded input")
    xp = pad_hw(x, padding, padding) if padding else x
    lead = (slice(None),) * (len(x.shape) - 3)
    out = None
    for ki in range(k):
        for kj in range(k):
            key = lead + (slice(ki, ki + stride * oh, stride), slice(kj, kj + stride * ow, stride), slice(None))
            patch = slice_(xp, key)
            term = matmul(patch, slice_(w, (ki, kj)))
            out = term if out is None else add(out, term)
    if b is not None:
        out = add(out, b)
    return out


def depthwise_conv2d(x: Tensor, w: Tensor) -> Tensor:
    """Per-channel 3x3 convolution on [..., h, w, d], stride 1, same padding.

    Kernel shape [3, 3, d]; channel c of the output only sees channel c of
    the input.
    """
    k = w.shape[0]
    require(w.shape == (k, k, x.shape[-1]), "depthwise kernel must be [k, k, d]")
    require(k % 2 == 1, "same padding needs an odd kernel")
    pad = k // 2
    h, wd = x.shape[-3], x.shape[-2]
    xp = pad_hw(x, pad, pad)
    lead = (slice(None),) * (len(x.shape) - 3)
    out = None
    for ki in range(k):
        for kj in range(k):
            key = lead + (slice(ki, ki + h), slice(kj, kj + wd), slice(None))
            term = mul(slice_(xp, key), slice_(w, (ki, kj)))
            out = term if out is None else add(out, term)
    return out


# ---------------------------------------------------------------- FD oracle

def finite_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function at x (f64)."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * eps)
    return g
