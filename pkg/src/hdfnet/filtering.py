"""Complex deep-filter application in all geometries, plus sub-band fusion.

Tap layout for the general filter is fixed: temporal index ``i`` is the
major axis (i = 0 is the current frame) and frequency offset ``j`` the
minor one, running -J..J.  Tap (i, j) multiplies X(t - i, f - j); taps that
fall outside the spectrogram contribute zero.  The coefficient head and the
trainer both rely on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import ComplexSpectrogram

FILTER_MODES = ("CRM", "TDF", "FDF", "DF")


@dataclass(frozen=True)
class FilterSpec:
    mode: str
    temporal_taps: int = 1
    freq_halfwidth: int = 0

    def __post_init__(self):
        if self.mode not in FILTER_MODES:
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if self.temporal_taps < 1 or self.freq_halfwidth < 0:
            raise ValueError("need temporal_taps >= 1 and freq_halfwidth >= 0")
        if self.mode == "TDF" and self.freq_halfwidth != 0:
            raise ValueError("TDF must have freq_halfwidth = 0")
        if self.mode == "FDF" and self.temporal_taps != 1:
            raise ValueError("FDF must have temporal_taps = 1")
        if self.mode == "CRM" and (self.temporal_taps != 1 or self.freq_halfwidth != 0):
            raise ValueError("CRM must have a single tap")

    @property
    def n_taps(self) -> int:
        return self.temporal_taps * (2 * self.freq_halfwidth + 1)

    @classmethod
    def from_order(cls, mode: str, order: int) -> "FilterSpec":
        """Build a spec from a single odd filter order (number of taps per axis)."""
        if order < 1 or order % 2 == 0:
            raise ValueError(f"filter order must be odd and >= 1, got {order}")
        if mode == "CRM":
            return cls("CRM")
        if mode == "TDF":
            return cls("TDF", temporal_taps=order)
        if mode == "FDF":
            return cls("FDF", freq_halfwidth=(order - 1) // 2)
        if mode == "DF":
            return cls("DF", temporal_taps=order, freq_halfwidth=(order - 1) // 2)
        raise ValueError(f"unknown filter mode {mode!r}")


@dataclass
class FilterCoeffs:
    """Per-bin complex taps, real/imag each shaped (T, F, n_taps)."""

    real: np.ndarray
    imag: np.ndarray
    spec: FilterSpec

    def __post_init__(self):
        self.real = np.asarray(self.real, dtype=np.float64)
        self.imag = np.asarray(self.imag, dtype=np.float64)
        if self.real.shape != self.imag.shape:
            raise ValueError("real/imag shapes differ")
        if self.real.ndim != 3 or self.real.shape[2] != self.spec.n_taps:
            raise ValueError(
                f"coefficients shaped {self.real.shape}, spec implies "
                f"(T, F, {self.spec.n_taps})"
            )


@dataclass(frozen=True)
class SbfSpec:
    k: int = 5

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"sub-band count must be odd and >= 1, got {self.k}")


def _check_shapes(x: ComplexSpectrogram, c: FilterCoeffs) -> None:
    if c.real.shape[:2] != x.data.shape:
        raise ValueError(
            f"coefficient grid {c.real.shape[:2]} does not match spectrogram "
            f"{x.data.shape}"
        )


def _filter_mac(x: ComplexSpectrogram, c: FilterCoeffs) -> ComplexSpectrogram:
    taps, half = c.spec.temporal_taps, c.spec.freq_halfwidth
    coeff = c.real + 1j * c.imag
    data = x.data
    T, F = data.shape
    out = np.zeros((T, F), dtype=np.complex128)
    for i in range(taps):
        for jj, j in enumerate(range(-half, half + 1)):
            n = i * (2 * half + 1) + jj
            shifted = np.zeros_like(data)
            # destination (t, f) reads X(t - i, f - j)
            f_lo, f_hi = max(0, j), min(F, F + j)
            shifted[i:, f_lo:f_hi] = data[: T - i, f_lo - j : f_hi - j]
            out += coeff[:, :, n] * shifted
    return ComplexSpectrogram(out, params=x.params)


def apply_df(x: ComplexSpectrogram, c: FilterCoeffs) -> ComplexSpectrogram:
    """General causal-in-time deep filter, Y(t,f) = sum_ij C(t,f,ij) X(t-i, f-j)."""
    if c.spec.mode != "DF":
        raise ValueError(f"apply_df needs mode DF, got {c.spec.mode}")
    _check_shapes(x, c)
    return _filter_mac(x, c)


def apply_tdf(x: ComplexSpectrogram, c: FilterCoeffs) -> ComplexSpectrogram:
    """Temporal deep filter over the current and preceding frames."""
    if c.spec.mode != "TDF":
        raise ValueError(f"apply_tdf needs mode TDF, got {c.spec.mode}")
    _check_shapes(x, c)
    return _filter_mac(x, c)


def apply_fdf(x: ComplexSpectrogram, c: FilterCoeffs) -> ComplexSpectrogram:
    """Frequency deep filter over neighboring bins of the current frame."""
    if c.spec.mode != "FDF":
        raise ValueError(f"apply_fdf needs mode FDF, got {c.spec.mode}")
    _check_shapes(x, c)
    return _filter_mac(x, c)


def apply_crm(x: ComplexSpectrogram, c: FilterCoeffs) -> ComplexSpectrogram:
    """Elementwise complex ratio mask."""
    if c.spec.mode != "CRM":
        raise ValueError(f"apply_crm needs mode CRM, got {c.spec.mode}")
    _check_shapes(x, c)
    return _filter_mac(x, c)


_APPLY = {"CRM": apply_crm, "TDF": apply_tdf, "FDF": apply_fdf, "DF": apply_df}


def apply_filter(x: ComplexSpectrogram, c: FilterCoeffs) -> ComplexSpectrogram:
    """Dispatch on the coefficient geometry."""
    return _APPLY[c.spec.mode](x, c)


def sbf_expand(m: np.ndarray, s: SbfSpec) -> np.ndarray:
    """Replicate the k neighboring bands of each band into the channel dim.

    Input (B, C, T, F) becomes (B, C * k, T, F); the channel block for offset
    d (offset-major, d = -(k-1)/2 .. (k-1)/2) holds the input shifted by d
    along frequency with zero padding at the edges.
    """
    if m.ndim != 4:
        raise ValueError(f"expected (B, C, T, F) input, got shape {m.shape}")
    B, C, T, F = m.shape
    half = (s.k - 1) // 2
    blocks = []
    for d in range(-half, half + 1):
        block = np.zeros_like(m)
        f_lo, f_hi = max(0, d), min(F, F + d)
        block[:, :, :, f_lo:f_hi] = m[:, :, :, f_lo - d : f_hi - d]
        blocks.append(block)
    return np.concatenate(blocks, axis=1)
