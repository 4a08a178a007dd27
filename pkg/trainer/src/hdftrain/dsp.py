"""Framing, losses, and the SI-SDR metric used by the trainer.

The STFT/iSTFT here reimplements the engine's documented convention
(centered periodic-Hann frames, 50% overlap-add with squared-window
normalization) so that exported fixtures line up sample-for-sample. Only
the losses need gradients; framing runs in plain numpy on data tensors.
"""

from __future__ import annotations

import numpy as np
import torch

SAMPLE_RATE = 16000
WINDOW = 512
HOP = 256
FFT_SIZE = 512
N_BINS = FFT_SIZE // 2 + 1
EPS = 1e-12


def hann_window(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft(samples: np.ndarray) -> np.ndarray:
    """Centered STFT, (T, 257) complex. Pads right to the next hop multiple."""
    samples = np.asarray(samples, dtype=np.float64)
    n = len(samples)
    pad_left = WINDOW // 2
    pad_right = WINDOW // 2 + (-n) % HOP
    x = np.pad(samples, (pad_left, pad_right), mode="reflect")
    n_frames = (len(x) - WINDOW) // HOP + 1
    win = hann_window(WINDOW)
    idx = np.arange(WINDOW)[None, :] + HOP * np.arange(n_frames)[:, None]
    return np.fft.rfft(x[idx] * win[None, :], n=FFT_SIZE, axis=1)


def istft(spec: np.ndarray) -> np.ndarray:
    """Overlap-add inverse; returns (T - 1) * hop samples."""
    spec = np.asarray(spec, dtype=np.complex128)
    n_frames = spec.shape[0]
    win = hann_window(WINDOW)
    frames = np.fft.irfft(spec, n=FFT_SIZE, axis=1)[:, :WINDOW]
    total = (n_frames - 1) * HOP + WINDOW
    out = np.zeros(total)
    wsum = np.zeros(total)
    for t in range(n_frames):
        lo = t * HOP
        out[lo : lo + WINDOW] += frames[t] * win
        wsum[lo : lo + WINDOW] += win * win
    out /= np.maximum(wsum, EPS)
    pad_left = WINDOW // 2
    return out[pad_left : pad_left + (n_frames - 1) * HOP]


# --- differentiable spectral losses -------------------------------------

GRAD_EPS = 1e-8  # keeps |S|^(c-1) gradients finite near zero bins


def _compressed_mag(spec: torch.Tensor, c: float) -> torch.Tensor:
    return (spec.abs() + GRAD_EPS) ** c


def mag_loss(target: torch.Tensor, est: torch.Tensor, c: float = 0.3) -> torch.Tensor:
    return ((_compressed_mag(target, c) - _compressed_mag(est, c)) ** 2).mean()


def _compressed(spec: torch.Tensor, c: float) -> torch.Tensor:
    mag = spec.abs() + GRAD_EPS
    return spec * (mag ** (c - 1.0))


def comp_loss(target: torch.Tensor, est: torch.Tensor, c: float = 0.3) -> torch.Tensor:
    diff = _compressed(target, c) - _compressed(est, c)
    return (diff.real**2).mean() + (diff.imag**2).mean()


def total_loss(
    target: torch.Tensor,
    est: torch.Tensor,
    c: float = 0.3,
    alpha: float = 0.5,
    beta: float = 0.5,
) -> torch.Tensor:
    return alpha * mag_loss(target, est, c) + beta * comp_loss(target, est, c)


def si_sdr(reference: np.ndarray, estimate: np.ndarray, cap_db: float = 100.0) -> float:
    """Scale-invariant SDR in dB, capped at +/- cap_db."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    energy = reference @ reference
    if energy < EPS:
        return -cap_db
    proj = (estimate @ reference / energy) * reference
    noise = estimate - proj
    num = proj @ proj
    den = noise @ noise
    if den < EPS * max(num, 1.0):
        return cap_db
    return float(np.clip(10.0 * np.log10(num / max(den, EPS)), -cap_db, cap_db))
