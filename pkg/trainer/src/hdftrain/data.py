"""Synthetic harmonic-plus-noise training corpus.

Each utterance is a 2-second harmonic complex (random fundamental in
[80, 400] Hz, random per-harmonic amplitudes and phases, slow amplitude
envelope) mixed with a white/pink noise blend at an exactly realized SNR
drawn from {0, 5, 10, 15} dB. Items are deterministic given (seed, index):
``noisy = clean + noise`` holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import SAMPLE_RATE

SEGMENT_SECONDS = 2.0
SEGMENT_SAMPLES = int(SEGMENT_SECONDS * SAMPLE_RATE)
SNR_CHOICES_DB = (0.0, 5.0, 10.0, 15.0)
MAX_HARMONIC_HZ = 7600.0
CLEAN_RMS = 0.05


@dataclass
class Utterance:
    clean: np.ndarray
    noise: np.ndarray
    snr_db: float

    @property
    def noisy(self) -> np.ndarray:
        return self.clean + self.noise


def _pink(rng: np.random.Generator, n: int) -> np.ndarray:
    spec = np.fft.rfft(rng.normal(size=n))
    f = np.arange(len(spec), dtype=np.float64)
    f[0] = 1.0
    return np.fft.irfft(spec / np.sqrt(f), n=n)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2)))


class SyntheticDataset:
    def __init__(self, n_utterances: int, seed: int = 0, clean_only: bool = False):
        self.n_utterances = n_utterances
        self.seed = seed
        self.clean_only = clean_only

    def __len__(self) -> int:
        return self.n_utterances

    def __getitem__(self, idx: int) -> Utterance:
        if not 0 <= idx < self.n_utterances:
            raise IndexError(idx)
        rng = np.random.default_rng(100003 * self.seed + idx)
        t = np.arange(SEGMENT_SAMPLES) / SAMPLE_RATE

        f0 = rng.uniform(80.0, 400.0)
        n_harm = int(MAX_HARMONIC_HZ // f0)
        decay = rng.uniform(0.5, 1.5)
        clean = np.zeros(SEGMENT_SAMPLES)
        for h in range(1, n_harm + 1):
            amp = h**-decay * rng.uniform(0.5, 1.0)
            clean += amp * np.sin(2.0 * np.pi * f0 * h * t + rng.uniform(0, 2 * np.pi))
        env_hz = rng.uniform(0.5, 4.0)
        clean *= 0.55 + 0.45 * np.sin(2.0 * np.pi * env_hz * t + rng.uniform(0, 2 * np.pi))
        clean *= CLEAN_RMS / _rms(clean)

        snr_db = float(rng.choice(SNR_CHOICES_DB))
        if self.clean_only:
            return Utterance(clean, np.zeros_like(clean), np.inf)
        pink_frac = rng.uniform(0.0, 1.0)
        white = rng.normal(size=SEGMENT_SAMPLES)
        pink = _pink(rng, SEGMENT_SAMPLES)
        noise = pink_frac * pink / _rms(pink) + (1.0 - pink_frac) * white / _rms(white)
        noise *= _rms(clean) / _rms(noise) * 10.0 ** (-snr_db / 20.0)
        return Utterance(clean, noise, snr_db)
