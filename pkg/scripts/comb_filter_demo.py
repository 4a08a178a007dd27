#!/usr/bin/env python3
"""Demonstrate the comb effect of hand-built temporal deep-filter taps.

Builds a frame-periodic spectrogram plus white spectral noise, averages
frames {t, t-P, t-2P, ...} with equal TDF taps, and prints the per-bin SNR
improvement.
"""

import argparse

import numpy as np

from hdfnet.filtering import FilterCoeffs, FilterSpec, apply_tdf
from hdfnet.spectral import ComplexSpectrogram


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--period", type=int, default=3, help="frame period P")
    parser.add_argument("--taps", type=int, default=5, help="averaged periods")
    parser.add_argument("--noise", type=float, default=0.3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    T, F = 120, 32
    base = rng.normal(size=(args.period, F)) + 1j * rng.normal(size=(args.period, F))
    clean = np.tile(base, (T // args.period + 1, 1))[:T]
    noisy = clean + args.noise * (rng.normal(size=(T, F)) + 1j * rng.normal(size=(T, F)))

    n_taps = (args.taps - 1) * args.period + 1
    c = np.zeros((T, F, n_taps))
    c[:, :, :: args.period] = 1.0 / args.taps
    spec = FilterSpec("TDF", temporal_taps=n_taps)
    out = apply_tdf(ComplexSpectrogram(noisy), FilterCoeffs(c, np.zeros_like(c), spec)).data

    lo = n_taps
    sig = np.mean(np.abs(clean[lo:]) ** 2, axis=0)
    before = 10 * np.log10(sig / np.mean(np.abs(noisy[lo:] - clean[lo:]) ** 2, axis=0))
    after = 10 * np.log10(sig / np.mean(np.abs(out[lo:] - clean[lo:]) ** 2, axis=0))
    gain = after - before
    print(f"snr_before_db_mean={before.mean():.2f}")
    print(f"snr_after_db_mean={after.mean():.2f}")
    print(f"per_bin_gain_db_min={gain.min():.2f}")
    print(f"per_bin_gain_db_mean={gain.mean():.2f}")


if __name__ == "__main__":
    main()
