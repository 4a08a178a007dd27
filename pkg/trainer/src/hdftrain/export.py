"""Weight export to the engine's .hdfw container and parity fixtures.

The writer implements the documented bundle layout independently (all
little-endian): magic ``HDFW``, version u32, 32-byte sha256 of the
sorted-key config JSON, tensor count u32, per-tensor entries
(name_len u16, name, ndim u8, dims u32*ndim, payload offset u64), then a
contiguous float32 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch
from scipy.io import wavfile

from . import dsp
from .data import SyntheticDataset
from .model import ModelSettings, TwoStageModel, settings_digest

MAGIC = b"HDFW"
FORMAT_VERSION = 1


def write_bundle(tensors: dict[str, np.ndarray], settings: ModelSettings, path) -> None:
    names = sorted(tensors)
    header = bytearray()
    header += MAGIC
    header += struct.pack("<I", FORMAT_VERSION)
    header += settings_digest(settings)
    header += struct.pack("<I", len(names))
    payload = bytearray()
    for name in names:
        arr = np.ascontiguousarray(tensors[name], dtype="<f4")
        raw = name.encode()
        header += struct.pack("<H", len(raw)) + raw
        header += struct.pack("<B", arr.ndim)
        header += struct.pack(f"<{arr.ndim}I", *arr.shape)
        header += struct.pack("<Q", len(payload))
        payload += arr.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(bytes(payload))


def export_weights(ckpt: dict, path) -> None:
    """Write a trained checkpoint as an engine-loadable .hdfw bundle."""
    settings = ModelSettings(**ckpt["model_settings"])
    model = TwoStageModel(settings)
    model.load_state_dict(ckpt["state_dict"])
    write_bundle(model.export_tensors(), settings, path)


def write_wav(path, samples: np.ndarray) -> None:
    wavfile.write(path, dsp.SAMPLE_RATE, np.asarray(samples, dtype=np.float32))


def make_parity_fixture(seed: int, out_dir) -> dict[str, Path]:
    """Deterministic (input WAV, weights, expected outputs) triple.

    The expected spectrogram dump and WAV come from this package's forward
    pass in double precision; the engine must replay them within 1e-4
    relative.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = ModelSettings()
    torch.manual_seed(seed)
    model = TwoStageModel(settings).double().eval()

    utt = SyntheticDataset(1, seed=seed)[0]
    noisy = utt.noisy.astype(np.float32).astype(np.float64)  # WAV-quantized view
    paths = {
        "input_wav": out_dir / f"fixture{seed}_noisy.wav",
        "weights": out_dir / f"fixture{seed}.hdfw",
        "spectrogram": out_dir / f"fixture{seed}_expected.npz",
        "expected_wav": out_dir / f"fixture{seed}_expected.wav",
    }
    write_wav(paths["input_wav"], noisy)
    write_bundle(model.export_tensors(), settings, paths["weights"])

    xn = torch.tensor(dsp.stft(noisy), dtype=torch.complex128)[None]
    with torch.no_grad():
        _, s = model(xn)
    spec = s[0].numpy()
    np.savez(paths["spectrogram"], enhanced=spec)
    write_wav(paths["expected_wav"], dsp.istft(spec))
    return paths
