"""Deterministic binary model files.

Layout: magic ``FDRC``, a little-endian uint32 format version, a little-endian
uint64 header length, the header as UTF-8 JSON with sorted keys, then the raw
little-endian float64 parameter buffers in the order the header declares.
Identical inputs produce identical bytes, so a retrain from the same seed can
be verified with a file hash. (A zip-based container would embed timestamps
and break that.)
"""

import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import CheckpointError
from .layers import Network, layer_from_spec

MAGIC = b"FDRC"
VERSION = 1


@dataclass
class Checkpoint:
    kind: str
    hyperparams: dict
    network: Network
    val_loss_trace: list
    best_epoch: int
    meta: dict = field(default_factory=dict)


def save_checkpoint(path, kind, hyperparams, network, val_loss_trace,
                    best_epoch, meta=None):
    """Write the network and its training record to ``path`` atomically."""
    entries = []
    buffers = []
    for li, layer in enumerate(network.layers):
        for name, p in zip(layer.param_names(), layer.parameters()):
            entries.append([li, name, list(p.shape)])
            buffers.append(np.ascontiguousarray(p.value, dtype="<f8").tobytes())
    header = {
        "kind": kind,
        "hyperparams": dict(hyperparams),
        "layers": [layer.spec() for layer in network.layers],
        "params": entries,
        "val_loss_trace": [float(v) for v in val_loss_trace],
        "best_epoch": int(best_epoch),
        "meta": dict(meta or {}),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for buf in buffers:
            fh.write(buf)
    os.replace(tmp, path)


def load_checkpoint(path):
    """Read a model file back into a Checkpoint with a rebuilt network."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a model file (bad magic)")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    (hlen,) = struct.unpack_from("<Q", data, 8)
    if 16 + hlen > len(data):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(data[16:16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header ({exc})") from exc
    try:
        layers = [layer_from_spec(s) for s in header["layers"]]
        entries = header["params"]
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"{path}: malformed header ({exc})") from exc
    network = Network(layers)
    lookup = {}
    for layer_idx, layer in enumerate(network.layers):
        for name, p in zip(layer.param_names(), layer.parameters()):
            lookup[(layer_idx, name)] = p
    offset = 16 + hlen
    seen = set()
    for layer_idx, name, shape in entries:
        key = (layer_idx, name)
        if key not in lookup or key in seen:
            raise CheckpointError(f"{path}: parameter {name!r} of layer {layer_idx} "
                                  "does not match the declared layers")
        seen.add(key)
        p = lookup[key]
        if list(p.shape) != list(shape):
            raise CheckpointError(
                f"{path}: shape {shape} for layer {layer_idx} {name!r} "
                f"does not match the layer's {list(p.shape)}"
            )
        nbytes = int(np.prod(shape)) * 8 if shape else 8
        if offset + nbytes > len(data):
            raise CheckpointError(f"{path}: truncated buffer for layer {layer_idx} {name!r}")
        buf = np.frombuffer(data, dtype="<f8", count=nbytes // 8, offset=offset)
        p.value[...] = buf.reshape(shape)
        offset += nbytes
    if len(seen) != len(lookup):
        raise CheckpointError(f"{path}: missing parameter buffers")
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return Checkpoint(
        kind=header["kind"],
        hyperparams=header["hyperparams"],
        network=network,
        val_loss_trace=[float(v) for v in header["val_loss_trace"]],
        best_epoch=int(header["best_epoch"]),
        meta=header.get("meta", {}),
    )
