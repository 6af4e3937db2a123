"""SQZT binary trace files.

Layout (little-endian):
  64-byte header: magic "SQZT", version u16, channel count u16,
  bit depth u16, reserved u16, sample rate f64, sample count u64,
  metadata length u32, zero padding to 64 bytes;
  then UTF-8 metadata (key=value lines);
  then interleaved signed 16-bit samples.
"""
from __future__ import annotations

import struct

import numpy as np

from ..errors import DataError
from .models import RawTrace

MAGIC = b"SQZT"
VERSION = 1
_HEADER = struct.Struct("<4sHHHHdQI")  # 32 bytes used, padded to 64


def write_trace(path, trace: RawTrace) -> None:
    if trace.bit_depth > 16:
        raise DataError("SQZT files store 16-bit samples; trace is deeper")
    meta = "".join(f"{k}={v}\n" for k, v in sorted(trace.metadata.items()))
    meta_bytes = meta.encode("utf-8")
    n = len(trace.channels[0])
    header = _HEADER.pack(MAGIC, VERSION, len(trace.channels),
                          trace.bit_depth, 0, trace.sample_rate, n,
                          len(meta_bytes))
    interleaved = np.empty(n * len(trace.channels), dtype="<i2")
    for i, ch in enumerate(trace.channels):
        interleaved[i::len(trace.channels)] = ch.astype("<i2")
    with open(path, "wb") as f:
        f.write(header.ljust(64, b"\x00"))
        f.write(meta_bytes)
        f.write(interleaved.tobytes())


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            continue
    return text


def read_trace(path) -> RawTrace:
    with open(path, "rb") as f:
        header = f.read(64)
        if len(header) < 64:
            raise DataError(f"{path}: truncated header")
        magic, version, n_ch, bits, _, rate, count, meta_len = \
            _HEADER.unpack(header[:_HEADER.size])
        if magic != MAGIC:
            raise DataError(f"{path}: not an SQZT trace file")
        if version != VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        meta_bytes = f.read(meta_len)
        data = np.frombuffer(f.read(), dtype="<i2")
    if len(data) != count * n_ch:
        raise DataError(f"{path}: sample payload length mismatch")
    metadata = {}
    for line in meta_bytes.decode("utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            metadata[key] = _parse_value(value)
    channels = [data[i::n_ch].astype(np.int32) for i in range(n_ch)]
    return RawTrace(channels=channels, sample_rate=rate, bit_depth=bits,
                    metadata=metadata)
