"""Binary checkpoint container.

Layout (all little-endian)::

    8s   magic  b"OODCKPT\\0"
    u32  format version
    u32  header length N
    N    UTF-8 JSON header: model kind, model config, layer list with
         hyperparameters, tensor manifest (name, shape), training-config echo
    ...  float32 blobs, one per manifest entry, in manifest order

The JSON is written with sorted keys and fixed separators so that
``write(read(f))`` reproduces ``f`` byte for byte.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np
import torch

from .layers import LayerSpec

MAGIC = b"OODCKPT\x00"
VERSION = 1
_PREFIX = struct.Struct("<8sII")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    kind: str
    model_config: dict
    layers: list[tuple[str, LayerSpec]]
    tensors: dict[str, np.ndarray]  # insertion order is blob order
    train_config: dict = field(default_factory=dict)

    def header(self) -> dict:
        return {
            "kind": self.kind,
            "model_config": self.model_config,
            "layers": [{"name": n, **s.to_dict()} for n, s in self.layers],
            "tensors": [{"name": k, "shape": list(v.shape)} for k, v in self.tensors.items()],
            "train_config": self.train_config,
        }

    def to_bytes(self) -> bytes:
        head = json.dumps(self.header(), sort_keys=True, separators=(",", ":"),
                          allow_nan=True).encode()
        parts = [_PREFIX.pack(MAGIC, VERSION, len(head)), head]
        for v in self.tensors.values():
            parts.append(np.ascontiguousarray(v, dtype="<f4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, buf: bytes, source: str = "<bytes>") -> "Checkpoint":
        if len(buf) < _PREFIX.size:
            raise CheckpointError(f"{source}: truncated checkpoint prefix")
        magic, version, n = _PREFIX.unpack_from(buf)
        if magic != MAGIC:
            raise CheckpointError(f"{source}: bad magic {magic!r}, not a checkpoint")
        if version != VERSION:
            raise CheckpointError(f"{source}: unsupported checkpoint version {version}")
        end = _PREFIX.size + n
        if len(buf) < end:
            raise CheckpointError(f"{source}: truncated header")
        head = json.loads(buf[_PREFIX.size:end].decode())
        tensors = {}
        off = end
        for entry in head["tensors"]:
            count = math.prod(entry["shape"])
            nbytes = 4 * count
            if off + nbytes > len(buf):
                raise CheckpointError(
                    f"{source}: truncated at byte offset {len(buf)} in tensor {entry['name']!r}"
                )
            arr = np.frombuffer(buf, dtype="<f4", count=count, offset=off)
            tensors[entry["name"]] = arr.reshape(entry["shape"]).copy()
            off += nbytes
        if off != len(buf):
            raise CheckpointError(f"{source}: {len(buf) - off} trailing bytes")
        layers = []
        for d in head["layers"]:
            d = dict(d)
            name = d.pop("name")
            layers.append((name, LayerSpec.from_dict(d)))
        return cls(head["kind"], head["model_config"], layers, tensors, head["train_config"])


def save(ckpt: Checkpoint, path) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(ckpt.to_bytes())
    os.replace(tmp, path)


def load(path) -> Checkpoint:
    with open(path, "rb") as fh:
        return Checkpoint.from_bytes(fh.read(), os.fspath(path))


def module_tensors(model: torch.nn.Module) -> dict[str, np.ndarray]:
    """Parameters and buffers in declaration order, as float32 arrays."""
    return {k: v.detach().cpu().to(torch.float32).numpy().copy()
            for k, v in model.state_dict().items()}


def load_module_tensors(model: torch.nn.Module, tensors: dict[str, np.ndarray]) -> None:
    state = model.state_dict()
    missing = [k for k in state if k not in tensors]
    if missing:
        raise CheckpointError(f"checkpoint lacks tensors {missing[:5]}")
    for k, v in state.items():
        if tuple(tensors[k].shape) != tuple(v.shape):
            raise CheckpointError(
                f"tensor {k!r} has shape {list(tensors[k].shape)}, model expects {list(v.shape)}"
            )
    model.load_state_dict({k: torch.from_numpy(tensors[k]).to(state[k].dtype) for k in state})
