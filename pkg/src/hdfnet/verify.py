"""Self-contained verification suite for the `verify` CLI command.

Runs the oracle and property checks (filter reductions against scalar
loops, STFT round trip, band-mapping transparency, causality probes, loss
oracles, structural parameter/MAC bands) and reports one ``name=pass|fail``
line per check.
"""

from __future__ import annotations

import numpy as np

from . import losses, model
from .erb import build_erb_filterbank, erb_analyze, erb_synthesize
from .filtering import (
    FilterCoeffs,
    FilterSpec,
    apply_crm,
    apply_df,
    apply_fdf,
    apply_tdf,
)
from .spectral import ComplexSpectrogram, StftParams, Waveform, istft, stft


def df_oracle(x: np.ndarray, c: FilterCoeffs) -> np.ndarray:
    """Scalar quadruple-loop reference for every filter geometry."""
    T, F = x.shape
    taps, half = c.spec.temporal_taps, c.spec.freq_halfwidth
    coeff = c.real + 1j * c.imag
    out = np.zeros((T, F), dtype=np.complex128)
    for t in range(T):
        for f in range(F):
            acc = 0.0 + 0.0j
            for i in range(taps):
                for jj, j in enumerate(range(-half, half + 1)):
                    ts, fs = t - i, f - j
                    if 0 <= ts < T and 0 <= fs < F:
                        acc += coeff[t, f, i * (2 * half + 1) + jj] * x[ts, fs]
            out[t, f] = acc
    return out


def _random_case(rng, spec: FilterSpec, T=6, F=8):
    x = ComplexSpectrogram(rng.normal(size=(T, F)) + 1j * rng.normal(size=(T, F)))
    n = spec.n_taps
    c = FilterCoeffs(
        rng.normal(size=(T, F, n)), rng.normal(size=(T, F, n)), spec
    )
    return x, c


def check_filter_oracles(rng, cases: int = 25) -> bool:
    apply = {"DF": apply_df, "TDF": apply_tdf, "FDF": apply_fdf, "CRM": apply_crm}
    for mode in ("DF", "TDF", "FDF", "CRM"):
        spec = FilterSpec.from_order(mode, 5 if mode != "CRM" else 1)
        for _ in range(cases):
            x, c = _random_case(rng, spec)
            got = apply[mode](x, c).data
            if np.max(np.abs(got - df_oracle(x.data, c))) > 1e-12:
                return False
    return True


def check_reduction_lattice(rng, cases: int = 20) -> bool:
    for _ in range(cases):
        x, c = _random_case(rng, FilterSpec.from_order("TDF", 5))
        as_df = FilterCoeffs(c.real, c.imag, FilterSpec("DF", 5, 0))
        if np.max(np.abs(apply_tdf(x, c).data - apply_df(x, as_df).data)) > 1e-12:
            return False
        x, c = _random_case(rng, FilterSpec.from_order("FDF", 5))
        as_df = FilterCoeffs(c.real, c.imag, FilterSpec("DF", 1, 2))
        if np.max(np.abs(apply_fdf(x, c).data - apply_df(x, as_df).data)) > 1e-12:
            return False
        x, c = _random_case(rng, FilterSpec("CRM"))
        as_df = FilterCoeffs(c.real, c.imag, FilterSpec("DF", 1, 0))
        if np.max(np.abs(apply_crm(x, c).data - apply_df(x, as_df).data)) > 1e-12:
            return False
    return True


def check_stft_roundtrip(rng) -> bool:
    p = StftParams()
    w = Waveform(rng.normal(size=16000) * 0.1)
    rec = istft(stft(w, p), p).samples
    n = min(len(rec), len(w))
    lo, hi = p.window_len, n - p.window_len
    err = np.linalg.norm(rec[lo:hi] - w.samples[lo:hi]) / np.linalg.norm(
        w.samples[lo:hi]
    )
    return err <= 1e-6


def check_erb_transparency() -> bool:
    fb = build_erb_filterbank()
    low = np.zeros((1, 1, 1, 257))
    low[..., 10] = 1.0
    band = erb_analyze(low, fb)
    if not (band[..., 10] == 1.0 and band.sum() == 1.0):
        return False
    back = erb_synthesize(band, fb)
    if not np.array_equal(back, low):
        return False
    k = np.arange(257)
    smooth = (1.0 + 0.5 * np.cos(2 * np.pi * k / 257.0))[None, None, None, :]
    rec = erb_synthesize(erb_analyze(smooth, fb), fb)
    return np.linalg.norm(rec - smooth) / np.linalg.norm(smooth) <= 0.05


def check_causality(rng, draws: int = 3, T: int = 12) -> bool:
    cfg = model.ModelConfig()
    for d in range(draws):
        weights = model.init_random_weights(cfg, np.random.default_rng(1000 + d))
        x = ComplexSpectrogram(
            rng.normal(size=(T, 257)) + 1j * rng.normal(size=(T, 257))
        )
        t0 = T // 2
        y_ref = model.hdf_enhance(x, weights, cfg).data
        pert = x.data.copy()
        pert[t0 + 1 :] += rng.normal(size=(T - t0 - 1, 257))
        y_pert = model.hdf_enhance(ComplexSpectrogram(pert), weights, cfg).data
        if not np.array_equal(y_ref[: t0 + 1], y_pert[: t0 + 1]):
            return False
    return True


def check_losses(rng) -> bool:
    shape = (6, 8)
    s = ComplexSpectrogram(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    e = ComplexSpectrogram(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    c = 0.3
    # scalar-loop oracles
    acc_mag = 0.0
    acc_re = 0.0
    acc_im = 0.0
    for t in range(shape[0]):
        for f in range(shape[1]):
            sv, ev = s.data[t, f], e.data[t, f]
            acc_mag += (abs(sv) ** c - abs(ev) ** c) ** 2
            sc = abs(sv) ** c * np.exp(1j * np.angle(sv))
            ec = abs(ev) ** c * np.exp(1j * np.angle(ev))
            acc_re += (sc.real - ec.real) ** 2
            acc_im += (sc.imag - ec.imag) ** 2
    n = shape[0] * shape[1]
    ok = abs(losses.mag_loss(s, e, c) - acc_mag / n) <= 1e-12
    ok &= abs(losses.comp_loss(s, e, c) - (acc_re + acc_im) / n) <= 1e-12
    ok &= losses.total_loss(s, s, losses.LossConfig()) == 0.0
    return bool(ok)


def check_structure() -> bool:
    cfg = model.ModelConfig()
    params = model.param_count(cfg)
    macs = model.macs_per_second(cfg)
    return 0.10e6 <= params <= 0.40e6 and 0.2e9 <= macs <= 0.9e9


def run_all(seed: int = 0) -> dict[str, bool]:
    rng = np.random.default_rng(seed)
    return {
        "filter_oracles": check_filter_oracles(rng),
        "reduction_lattice": check_reduction_lattice(rng),
        "stft_roundtrip": check_stft_roundtrip(rng),
        "erb_transparency": check_erb_transparency(),
        "causality": check_causality(rng),
        "loss_oracles": check_losses(rng),
        "structural_budget": check_structure(),
    }
