"""Binary model file: magic "GINM", version, dims, then float64 parameters.

Layout (all little-endian): 4-byte magic, u32 version, u32 input dim,
u32 hidden dim, u32 layer count, then each layer's w1/b1/w2/b2 followed by
the readout weight and bias, row-major float64. Round-trips bitwise.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .model import GinLayer, GinModel

MAGIC = b"GINM"
VERSION = 1


def save_model(model: GinModel, path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III I", VERSION, model.input_dim, model.hidden,
                             len(model.layers)))
        for param in model.parameters():
            fh.write(np.ascontiguousarray(param, dtype="<f8").tobytes())


def load_model(path) -> GinModel:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 20:
        raise FormatError(f"{path}: truncated header")
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    version, input_dim, hidden, n_layers = struct.unpack("<IIII", data[4:20])
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}; supported: {VERSION}")
    offset = 20

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + count * 8
        if end > len(data):
            raise FormatError(f"{path}: truncated parameter data")
        arr = np.frombuffer(data[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
        return arr

    layers = []
    in_dim = input_dim
    for _ in range(n_layers):
        layers.append(GinLayer(
            w1=take((in_dim, hidden)),
            b1=take((hidden,)),
            w2=take((hidden, hidden)),
            b2=take((hidden,)),
        ))
        in_dim = hidden
    readout_w = take((hidden, 2))
    readout_b = take((2,))
    if offset != len(data):
        raise FormatError(f"{path}: {len(data) - offset} trailing bytes")
    return GinModel(layers=layers, readout_w=readout_w, readout_b=readout_b,
                    input_dim=input_dim, hidden=hidden)
