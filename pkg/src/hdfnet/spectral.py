"""STFT frontend, feature stacking, and power-law spectral compression.

All operations here are pure functions over immutable inputs. The analysis
convention is centered: the signal is reflect-padded by half a window on
each side before framing, so frame ``t`` is centered at sample ``t * hop``.
The right side receives additional zero-equivalent reflect padding up to the
next hop multiple so that the inverse transform can recover every input
sample, not just the last full frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIPELINE_SAMPLE_RATE = 16000
EPS = 1e-12


@dataclass(frozen=True)
class StftParams:
    """Analysis/synthesis parameters. Defaults: 32 ms Hann, 50% overlap, 512 FFT."""

    window_len: int = 512
    hop: int = 256
    fft_size: int = 512
    window_kind: str = "hann"

    def __post_init__(self):
        if not (0 < self.hop <= self.window_len <= self.fft_size):
            raise ValueError(
                f"need hop <= window_len <= fft_size, got "
                f"({self.hop}, {self.window_len}, {self.fft_size})"
            )
        if self.window_kind != "hann":
            raise ValueError(f"unsupported window kind: {self.window_kind!r}")

    @property
    def bin_count(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def frames_per_second(self) -> float:
        return PIPELINE_SAMPLE_RATE / self.hop


@dataclass
class Waveform:
    """Mono waveform, amplitudes nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = PIPELINE_SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"expected mono 1-D samples, got shape {self.samples.shape}")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass
class ComplexSpectrogram:
    """Complex time-frequency representation, shape (frames, bins)."""

    data: np.ndarray
    params: StftParams | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2:
            raise ValueError(f"expected (T, F) array, got shape {self.data.shape}")

    @property
    def real_part(self) -> np.ndarray:
        return self.data.real

    @property
    def imag_part(self) -> np.ndarray:
        return self.data.imag

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    @property
    def frame_count(self) -> int:
        return self.data.shape[0]

    @property
    def bin_count(self) -> int:
        return self.data.shape[1]


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window (COLA-compatible at 50% overlap)."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def _check_waveform(w: Waveform) -> None:
    if len(w) == 0:
        raise ValueError("empty waveform")
    if w.sample_rate != PIPELINE_SAMPLE_RATE:
        raise ValueError(
            f"pipeline requires {PIPELINE_SAMPLE_RATE} Hz input, got {w.sample_rate} Hz"
        )
    if not np.all(np.isfinite(w.samples)):
        raise ValueError("waveform contains non-finite samples")


def stft(w: Waveform, p: StftParams = StftParams()) -> ComplexSpectrogram:
    """Centered short-time Fourier transform, shape (T, fft_size // 2 + 1)."""
    _check_waveform(w)
    n = len(w)
    pad_left = p.window_len // 2
    pad_right = p.window_len // 2 + (-n) % p.hop
    x = np.pad(w.samples, (pad_left, pad_right), mode="reflect")
    n_frames = (len(x) - p.window_len) // p.hop + 1
    win = hann_window(p.window_len)
    idx = np.arange(p.window_len)[None, :] + p.hop * np.arange(n_frames)[:, None]
    frames = x[idx] * win[None, :]
    spec = np.fft.rfft(frames, n=p.fft_size, axis=1)
    return ComplexSpectrogram(spec, params=p)


def istft(s: ComplexSpectrogram, p: StftParams = StftParams()) -> Waveform:
    """Overlap-add inverse with squared-window normalization.

    Returns ``(T - 1) * hop`` samples; trailing partial-frame content past
    that point is indeterminate and dropped.
    """
    if s.bin_count != p.bin_count:
        raise ValueError(
            f"spectrogram has {s.bin_count} bins, params imply {p.bin_count}"
        )
    n_frames = s.frame_count
    win = hann_window(p.window_len)
    frames = np.fft.irfft(s.data, n=p.fft_size, axis=1)[:, : p.window_len]
    total = (n_frames - 1) * p.hop + p.window_len
    out = np.zeros(total)
    wsum = np.zeros(total)
    for t in range(n_frames):
        lo = t * p.hop
        out[lo : lo + p.window_len] += frames[t] * win
        wsum[lo : lo + p.window_len] += win * win
    out = out / np.maximum(wsum, EPS)
    pad_left = p.window_len // 2
    n_out = (n_frames - 1) * p.hop
    return Waveform(out[pad_left : pad_left + n_out])


def build_feature_stack(
    x: ComplexSpectrogram, s1: ComplexSpectrogram | None = None
) -> np.ndarray:
    """Stack spectrogram channels for the network input.

    Without a first-stage estimate the channels are (|X|, X_r, X_i); with one
    they are (|X|, X_i, X_r, |S1|, S1_i, S1_r). Output shape (1, C, T, F).
    """
    if s1 is None:
        chans = [x.magnitude, x.real_part, x.imag_part]
    else:
        if s1.data.shape != x.data.shape:
            raise ValueError(
                f"stage-1 shape {s1.data.shape} does not match input {x.data.shape}"
            )
        chans = [
            x.magnitude,
            x.imag_part,
            x.real_part,
            s1.magnitude,
            s1.imag_part,
            s1.real_part,
        ]
    return np.stack(chans, axis=0)[None, :, :, :]


def compress(s: ComplexSpectrogram, c: float) -> ComplexSpectrogram:
    """Power-law magnitude compression |S|^c with phase preserved."""
    if not (0.0 < c <= 1.0):
        raise ValueError(f"compression exponent must be in (0, 1], got {c}")
    mag = np.abs(s.data)
    scale = np.where(mag > EPS, mag ** c / np.maximum(mag, EPS), 0.0)
    return ComplexSpectrogram(s.data * scale, params=s.params)
