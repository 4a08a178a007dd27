"""WAV reading and writing (16 kHz mono, PCM16 or float32)."""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .spectral import PIPELINE_SAMPLE_RATE, Waveform


class WavFormatError(ValueError):
    pass


def read_wav(path) -> Waveform:
    """Read a 16 kHz mono WAV file; samples normalized to [-1, 1]."""
    rate, data = wavfile.read(path)
    if rate != PIPELINE_SAMPLE_RATE:
        raise WavFormatError(
            f"unsupported sample rate {rate} Hz (need {PIPELINE_SAMPLE_RATE})"
        )
    if data.ndim != 1:
        raise WavFormatError(f"unsupported channel count {data.shape[1]} (need mono)")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise WavFormatError(
            f"unsupported sample encoding {data.dtype} (need int16 or float32)"
        )
    return Waveform(samples, rate)


def write_wav(path, w: Waveform, encoding: str = "float32") -> None:
    """Write a waveform as float32 (lossless round trip) or PCM16."""
    if w.sample_rate != PIPELINE_SAMPLE_RATE:
        raise WavFormatError(
            f"unsupported sample rate {w.sample_rate} Hz (need {PIPELINE_SAMPLE_RATE})"
        )
    if encoding == "float32":
        wavfile.write(path, w.sample_rate, w.samples.astype(np.float32))
    elif encoding == "pcm16":
        clipped = np.clip(w.samples, -1.0, 32767.0 / 32768.0)
        wavfile.write(path, w.sample_rate, np.round(clipped * 32768.0).astype(np.int16))
    else:
        raise WavFormatError(f"unsupported encoding {encoding!r}")
