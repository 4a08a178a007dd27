"""Linear <-> perceptual band matrices, identical construction to the engine.

Low bins are kept one-hot; the high bins are pooled by triangles whose
centers are equally spaced on the ERB-rate scale, feet at neighboring
centers, rows renormalized to sum to 1 in both directions.
"""

from __future__ import annotations

import numpy as np


def hz_to_erb_rate(f):
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(f, dtype=np.float64))


def band_matrices(
    n_fft_bins: int = 257,
    sample_rate: int = 16000,
    n_low_kept: int = 65,
    n_erb_high: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (analysis (n_bands, F), synthesis (F, n_bands))."""
    n_high = n_fft_bins - n_low_kept
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
    return analysis, synthesis
