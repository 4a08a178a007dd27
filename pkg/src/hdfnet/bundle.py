"""Single-file binary weight bundle (.hdfw).

Layout, all little-endian:

    magic   4 bytes  b"HDFW"
    version u32
    digest  32 bytes (sha256 of the canonical model-config JSON)
    count   u32
    entries: name_len u16, name utf-8, ndim u8, dims u32 * ndim, offset u64
    payload: raw float32 data, offsets relative to payload start

Offsets are contiguous and non-overlapping; every tensor is float32.
"""

from __future__ import annotations

import struct

import numpy as np

from .model import (
    ModelConfig,
    WeightBundle,
    WeightValidationError,
    config_digest,
    validate_weights,
    BUNDLE_FORMAT_VERSION,
)

MAGIC = b"HDFW"


class BundleFormatError(ValueError):
    """Malformed .hdfw container."""


class DigestMismatchError(WeightValidationError):
    """Bundle was produced for a different model configuration."""


def save_weights(bundle: WeightBundle, path) -> None:
    names = sorted(bundle.tensors)
    header = bytearray()
    header += MAGIC
    header += struct.pack("<I", BUNDLE_FORMAT_VERSION)
    header += config_digest(bundle.config)
    header += struct.pack("<I", len(names))
    payload = bytearray()
    for name in names:
        arr = np.ascontiguousarray(bundle.tensors[name], dtype="<f4")
        raw = name.encode()
        header += struct.pack("<H", len(raw)) + raw
        header += struct.pack("<B", arr.ndim)
        header += struct.pack(f"<{arr.ndim}I", *arr.shape)
        header += struct.pack("<Q", len(payload))
        payload += arr.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(bytes(payload))


def load_weights(path, cfg: ModelConfig) -> WeightBundle:
    """Load and fully validate a bundle against a configuration.

    Raises DigestMismatchError, then per-layer WeightValidationError for
    missing layers, shape mismatches, or unexpected extras.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise BundleFormatError(f"bad magic {blob[:4]!r}, not a weight bundle")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != BUNDLE_FORMAT_VERSION:
        raise BundleFormatError(f"unsupported format version {version}")
    digest = blob[8:40]
    if digest != config_digest(cfg):
        raise DigestMismatchError(
            "bundle digest does not match the supplied model configuration"
        )
    (count,) = struct.unpack_from("<I", blob, 40)
    pos = 44
    entries = []
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        name = blob[pos : pos + name_len].decode()
        pos += name_len
        (ndim,) = struct.unpack_from("<B", blob, pos)
        pos += 1
        dims = struct.unpack_from(f"<{ndim}I", blob, pos)
        pos += 4 * ndim
        (offset,) = struct.unpack_from("<Q", blob, pos)
        pos += 8
        entries.append((name, dims, offset))
    payload = blob[pos:]
    tensors = {}
    for name, dims, offset in entries:
        size = int(np.prod(dims)) if dims else 1
        end = offset + 4 * size
        if end > len(payload):
            raise BundleFormatError(f"tensor {name} overruns the payload")
        tensors[name] = np.frombuffer(
            payload[offset:end], dtype="<f4"
        ).reshape(dims).copy()
    bundle = WeightBundle(tensors, cfg)
    validate_weights(bundle, cfg)
    return bundle
