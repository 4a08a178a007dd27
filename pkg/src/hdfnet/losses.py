"""Compressed spectral losses and the scale-invariant SDR metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import ComplexSpectrogram, Waveform, compress

SI_SDR_CAP_DB = 100.0


@dataclass(frozen=True)
class LossConfig:
    c: float = 0.3
    alpha: float = 0.5
    beta: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.c <= 1.0):
            raise ValueError(f"compression exponent must be in (0, 1], got {self.c}")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ValueError("loss weights must be nonnegative with positive sum")


def _check_pair(s: ComplexSpectrogram, est: ComplexSpectrogram) -> None:
    if s.data.shape != est.data.shape:
        raise ValueError(f"shape mismatch: {s.data.shape} vs {est.data.shape}")


def mag_loss(s: ComplexSpectrogram, est: ComplexSpectrogram, c: float) -> float:
    """MSE between power-law compressed magnitudes."""
    _check_pair(s, est)
    a = np.abs(s.data) ** c
    b = np.abs(est.data) ** c
    return float(np.mean((a - b) ** 2))


def comp_loss(s: ComplexSpectrogram, est: ComplexSpectrogram, c: float) -> float:
    """MSE on real plus MSE on imaginary parts of the compressed spectra."""
    _check_pair(s, est)
    sc = compress(s, c).data
    ec = compress(est, c).data
    return float(np.mean((sc.real - ec.real) ** 2) + np.mean((sc.imag - ec.imag) ** 2))


def total_loss(s: ComplexSpectrogram, est: ComplexSpectrogram, cfg: LossConfig) -> float:
    """Weighted sum of the magnitude and complex losses."""
    return cfg.alpha * mag_loss(s, est, cfg.c) + cfg.beta * comp_loss(s, est, cfg.c)


def si_sdr(ref: Waveform, est: Waveform) -> float:
    """Scale-invariant SDR in dB, capped at +/- 100 dB."""
    r = ref.samples
    e = est.samples
    if r.shape != e.shape:
        raise ValueError(f"length mismatch: {r.shape} vs {e.shape}")
    energy = np.dot(r, r)
    if energy == 0.0:
        raise ValueError("reference signal is all zero")
    target = (np.dot(e, r) / energy) * r
    noise = e - target
    num = np.dot(target, target)
    den = np.dot(noise, noise)
    if den <= num * 10.0 ** (-SI_SDR_CAP_DB / 10.0):
        return SI_SDR_CAP_DB
    value = 10.0 * np.log10(num / den) if num > 0 else -SI_SDR_CAP_DB
    return float(np.clip(value, -SI_SDR_CAP_DB, SI_SDR_CAP_DB))
