"""Binary formats for embeddings and model checkpoints.

Both formats are little-endian with a 4-byte magic and a u32 version.

Embedding file (magic PFEM, version 1):
    magic, version, dtype code (0 = float32), rank u32,
    dims as u64 each, then the payload as float32.

Checkpoint file (magic PFCK, version 1):
    magic, version, tensor count u32, then per tensor:
    name length u32, UTF-8 name, rank u32, dims u64 each, float32 payload.

Payloads are written as float32 regardless of the in-memory dtype, so
save/load is the identity on float32 models.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .autodiff import Tensor
from .backbone import Module
from .errors import require

__all__ = [
    "save_embedding", "load_embedding", "save_checkpoint", "load_checkpoint",
    "state_dict", "load_into",
]

_EMB_MAGIC = b"PFEM"
_CKPT_MAGIC = b"PFCK"
_VERSION = 1
_DTYPE_F32 = 0


def save_embedding(path: str | Path, array: np.ndarray) -> None:
    arr = np.asarray(array, dtype="<f4")
    require(arr.ndim >= 1, "embedding must have rank >= 1")
    with open(path, "wb") as f:
        f.write(_EMB_MAGIC)
        f.write(struct.pack("<III", _VERSION, _DTYPE_F32, arr.ndim))
        f.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        f.write(arr.tobytes())


def load_embedding(path: str | Path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    require(data[:4] == _EMB_MAGIC, "not an embedding file (bad magic)")
    version, dtype_code, rank = struct.unpack_from("<III", data, 4)
    require(version == _VERSION, f"unsupported embedding file version {version}")
    require(dtype_code == _DTYPE_F32, f"unsupported dtype code {dtype_code}")
    dims = struct.unpack_from(f"<{rank}Q", data, 16)
    offset = 16 + 8 * rank
    count = int(np.prod(dims)) if rank else 1
    payload = data[offset: offset + 4 * count]
    require(len(payload) == 4 * count, "truncated embedding payload")
    require(len(data) == offset + 4 * count, "trailing bytes after embedding payload")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def state_dict(module: Module) -> dict[str, np.ndarray]:
    return {name: p.data for name, p in module.named_parameters().items()}


def save_checkpoint(path: str | Path, params: Module | dict[str, np.ndarray]) -> None:
    if isinstance(params, Module):
        params = state_dict(params)
    with open(path, "wb") as f:
        f.write(_CKPT_MAGIC)
        f.write(struct.pack("<II", _VERSION, len(params)))
        for name, value in params.items():
            arr = np.asarray(value.data if isinstance(value, Tensor) else value, dtype="<f4")
            encoded = name.encode("utf-8")
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<I", arr.ndim))
            if arr.ndim:
                f.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            f.write(arr.tobytes())


def load_checkpoint(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        data = f.read()
    require(data[:4] == _CKPT_MAGIC, "not a checkpoint file (bad magic)")
    version, count = struct.unpack_from("<II", data, 4)
    require(version == _VERSION, f"unsupported checkpoint version {version}")
    offset = 12
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        require(offset + 4 <= len(data), "truncated checkpoint (name length)")
        (name_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        name = data[offset: offset + name_len].decode("utf-8")
        offset += name_len
        (rank,) = struct.unpack_from("<I", data, offset)
        offset += 4
        dims = struct.unpack_from(f"<{rank}Q", data, offset)
        offset += 8 * rank
        n = int(np.prod(dims)) if rank else 1
        payload = data[offset: offset + 4 * n]
        require(len(payload) == 4 * n, f"truncated payload for tensor {name!r}")
        offset += 4 * n
        require(name not in out, f"duplicate tensor name {name!r}")
        out[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    require(offset == len(data), "trailing bytes after last tensor")
    return out


def load_into(module: Module, state: dict[str, np.ndarray]) -> None:
    """Copy a loaded state dict into a model, strict on names and shapes."""
    params = module.named_parameters()
    missing = sorted(set(params) - set(state))
    unexpected = sorted(set(state) - set(params))
    require(not missing, f"checkpoint is missing parameters: {missing[:5]}")
    require(not unexpected, f"checkpoint has unexpected parameters: {unexpected[:5]}")
    for name, p in params.items():
        arr = state[name]
        require(arr.shape == p.data.shape,
                f"shape mismatch for {name}: checkpoint {arr.shape}, model {p.data.shape}")
        p.data = arr.astype(p.data.dtype, copy=True)
