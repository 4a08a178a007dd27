"""Linear <-> ERB band mapping used by the first-stage network.

The low-frequency bins are kept untouched (one-hot rows) and the remaining
high bins are pooled into triangular bands whose centers are equally spaced
on the ERB-rate scale (Glasberg & Moore: 21.4 * log10(1 + 0.00437 * f)).
Adjacent triangles overlap 50%, forming a partition of unity over the high
bins, so constants survive a round trip in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def hz_to_erb_rate(f):
    """Glasberg & Moore ERB-rate scale."""
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(f, dtype=np.float64))


@dataclass(frozen=True)
class ErbFilterbank:
    analysis: np.ndarray    # (F_erb, F), rows sum to 1
    synthesis: np.ndarray   # (F, F_erb), rows sum to 1
    n_linear: int
    n_low_kept: int
    n_erb_high: int

    @property
    def n_bands(self) -> int:
        return self.n_low_kept + self.n_erb_high


def build_erb_filterbank(
    n_fft_bins: int = 257,
    sample_rate: int = 16000,
    n_low_kept: int = 65,
    n_erb_high: int = 64,
) -> ErbFilterbank:
    """Build the analysis/synthesis pair mapping n_fft_bins <-> n_low_kept + n_erb_high."""
    n_high = n_fft_bins - n_low_kept
    if n_low_kept < 0 or n_high < 0:
        raise ValueError("n_low_kept must be in [0, n_fft_bins]")
    if n_erb_high > n_high:
        raise ValueError(
            f"cannot map {n_high} high bins to {n_erb_high} ERB bands"
        )
    if n_high > 0 and n_erb_high < 1:
        raise ValueError("need at least one ERB band for the high region")

    n_bands = n_low_kept + n_erb_high
    analysis = np.zeros((n_bands, n_fft_bins))
    analysis[np.arange(n_low_kept), np.arange(n_low_kept)] = 1.0

    if n_high > 0:
        nyquist = sample_rate / 2.0
        bin_hz = np.arange(n_fft_bins) * nyquist / (n_fft_bins - 1)
        erb_pts = hz_to_erb_rate(bin_hz)
        centers = np.linspace(erb_pts[n_low_kept], erb_pts[-1], n_erb_high)
        if n_erb_high == 1:
            analysis[n_low_kept, n_low_kept:] = 1.0
        else:
            spacing = centers[1] - centers[0]
            for b in range(n_erb_high):
                tri = 1.0 - np.abs(erb_pts[n_low_kept:] - centers[b]) / spacing
                analysis[n_low_kept + b, n_low_kept:] = np.maximum(tri, 0.0)

    analysis /= analysis.sum(axis=1, keepdims=True)

    synthesis = analysis.T.copy()
    synthesis /= synthesis.sum(axis=1, keepdims=True)

    return ErbFilterbank(
        analysis=analysis,
        synthesis=synthesis,
        n_linear=n_fft_bins,
        n_low_kept=n_low_kept,
        n_erb_high=n_erb_high,
    )


def _apply_band_matrix(m: np.ndarray, mat: np.ndarray, expected: int) -> np.ndarray:
    if m.shape[-1] != expected:
        raise ValueError(f"frequency dim is {m.shape[-1]}, expected {expected}")
    return m @ mat.T


def erb_analyze(m: np.ndarray, fb: ErbFilterbank) -> np.ndarray:
    """Pool the last (frequency) axis from linear bins to ERB bands."""
    return _apply_band_matrix(m, fb.analysis, fb.n_linear)


def erb_synthesize(m: np.ndarray, fb: ErbFilterbank) -> np.ndarray:
    """Expand the last (frequency) axis from ERB bands back to linear bins."""
    return _apply_band_matrix(m, fb.synthesis, fb.n_bands)
