"""SQZQ binary quadrature-ensemble files.

Layout (little-endian): magic "SQZQ", version u16, count u64,
normalization flag u8 (0 raw, 1 shot-noise units), samples-per-state
u16, bandwidth f64, then interleaved f64 (x, p) pairs.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import DataError
from .ensemble import QuadratureEnsemble

MAGIC = b"SQZQ"
VERSION = 1
_HEADER = struct.Struct("<4sHQBHd")


def write_ensemble(path, ens: QuadratureEnsemble) -> None:
    flag = 1 if ens.normalization == "snu" else 0
    pairs = np.empty(2 * len(ens), dtype="<f8")
    pairs[0::2] = ens.x
    pairs[1::2] = ens.p
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, len(ens), flag,
                             ens.samples_per_state, ens.bandwidth))
        f.write(pairs.tobytes())


def read_ensemble(path) -> QuadratureEnsemble:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise DataError(f"{path}: truncated header")
        magic, version, count, flag, sps, bw = _HEADER.unpack(header)
        if magic != MAGIC:
            raise DataError(f"{path}: not an SQZQ ensemble file")
        if version != VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        pairs = np.frombuffer(f.read(), dtype="<f8")
    if len(pairs) != 2 * count:
        raise DataError(f"{path}: payload length mismatch")
    return QuadratureEnsemble(x=pairs[0::2].copy(), p=pairs[1::2].copy(),
                              normalization="snu" if flag else "raw",
                              samples_per_state=sps, bandwidth=bw)
