"""Minimal dense tensor kernels for the model graph, inference mode only.

Tensors are plain float64 numpy arrays laid out (batch, channel, time,
frequency).  Convolutions are causal along time: ``kt - 1`` zeros are
padded on the past side and none on the future side, so output frame t
never reads input frames past t.  Accumulation order is fixed (kernel
offset outer, channel contraction inner via matmul), which makes the
causality probes bit-exact.

Weight layouts follow the common deep-learning convention so that trained
parameters can be dropped in directly:

* conv2d:   (out_ch, in_ch / groups, kt, kf)
* deconv2d: (in_ch, out_ch / groups, kt, kf)
* GRU:      w_ih (3H, In), w_hh (3H, H), gate order (reset, update, candidate)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def check_tensor4(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise ValueError(f"expected (B, C, T, F) tensor, got shape {x.shape}")
    return x


@dataclass
class ConvParams:
    weight: np.ndarray
    bias: np.ndarray | None = None
    stride: tuple[int, int] = (1, 1)
    groups: int = 1
    pad_f: int = 0
    transposed: bool = False

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        if self.weight.ndim != 4:
            raise ValueError("conv weight must be 4-D")
        if self.bias is not None:
            self.bias = np.asarray(self.bias, dtype=np.float64)

    @property
    def kernel(self) -> tuple[int, int]:
        return self.weight.shape[2], self.weight.shape[3]


def conv2d(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """Grouped 2-D convolution, causal in time, symmetric pad_f in frequency."""
    if p.transposed:
        raise ValueError("use deconv2d for transposed convolutions")
    x = check_tensor4(x)
    B, C_in, T, F = x.shape
    C_out, in_per_g, kt, kf = p.weight.shape
    g = p.groups
    if C_out % g != 0:
        raise ValueError("output channels not divisible by group count")
    out_per_g = C_out // g
    if C_in != in_per_g * g:
        raise ValueError(
            f"input has {C_in} channels, weight implies {in_per_g * g}"
        )
    st, sf = p.stride
    xp = np.pad(x, ((0, 0), (0, 0), (kt - 1, 0), (p.pad_f, p.pad_f)))
    T_out = (T + (kt - 1) - kt) // st + 1
    F_out = (F + 2 * p.pad_f - kf) // sf + 1
    if T_out < 1 or F_out < 1:
        raise ValueError("kernel larger than padded input")
    out = np.zeros((B, C_out, T_out, F_out))
    w = p.weight.reshape(g, out_per_g, in_per_g, kt, kf)
    xg = xp.reshape(B, g, in_per_g, *xp.shape[2:])
    for dt in range(kt):
        for df in range(kf):
            xs = xg[:, :, :, dt : dt + T_out * st : st, df : df + F_out * sf : sf]
            out += np.einsum("goi,bgitf->bgotf", w[:, :, :, dt, df], xs).reshape(
                B, C_out, T_out, F_out
            )
    if p.bias is not None:
        out += p.bias[None, :, None, None]
    return out


def deconv2d(x: np.ndarray, p: ConvParams) -> np.ndarray:
    """Grouped transposed convolution inverting conv2d's frequency shape map.

    Frequency output length is (F - 1) * sf + kf - 2 * pad_f.  Time output
    keeps the input frame count (kt - 1 trailing positions are cropped from
    the future side so the layer stays causal).
    """
    if not p.transposed:
        raise ValueError("deconv2d needs transposed params")
    x = check_tensor4(x)
    B, C_in, T, F = x.shape
    in_ch, out_per_g, kt, kf = p.weight.shape
    g = p.groups
    if C_in != in_ch:
        raise ValueError(f"input has {C_in} channels, weight implies {in_ch}")
    st, sf = p.stride
    T_full = (T - 1) * st + kt
    F_full = (F - 1) * sf + kf
    C_out = out_per_g * g
    full = np.zeros((B, g, out_per_g, T_full, F_full))
    w = p.weight.reshape(g, in_ch // g, out_per_g, kt, kf)
    xg = x.reshape(B, g, in_ch // g, T, F)
    for dt in range(kt):
        for df in range(kf):
            full[:, :, :, dt : dt + T * st : st, df : df + F * sf : sf] += np.einsum(
                "gio,bgitf->bgotf", w[:, :, :, dt, df], xg
            )
    out = full.reshape(B, C_out, T_full, F_full)
    out = out[:, :, : T_full - (kt - 1), p.pad_f : F_full - p.pad_f]
    if p.bias is not None:
        out = out + p.bias[None, :, None, None]
    return out


@dataclass
class GruWeights:
    """One unidirectional GRU cell: gate order (reset, update, candidate)."""

    w_ih: np.ndarray
    w_hh: np.ndarray
    b_ih: np.ndarray
    b_hh: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.w_hh.shape[1]

    @property
    def input_size(self) -> int:
        return self.w_ih.shape[1]


@dataclass
class GruParams:
    """Possibly grouped, possibly bidirectional GRU along the sequence axis."""

    forward: list[GruWeights]
    backward: list[GruWeights] = field(default_factory=list)

    @property
    def groups(self) -> int:
        return len(self.forward)

    @property
    def bidirectional(self) -> bool:
        return bool(self.backward)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _gru_cell_run(x: np.ndarray, w: GruWeights, h0: np.ndarray | None):
    """x: (N, L, In) -> (N, L, H), h_T."""
    N, L, _ = x.shape
    H = w.hidden_size
    h = np.zeros((N, H)) if h0 is None else h0
    gi = x @ w.w_ih.T + w.b_ih  # (N, L, 3H)
    out = np.empty((N, L, H))
    for t in range(L):
        gh = h @ w.w_hh.T + w.b_hh
        i_r, i_z, i_n = np.split(gi[:, t], 3, axis=1)
        h_r, h_z, h_n = np.split(gh, 3, axis=1)
        r = _sigmoid(i_r + h_r)
        z = _sigmoid(i_z + h_z)
        n = np.tanh(i_n + r * h_n)
        h = (1.0 - z) * n + z * h
        out[:, t] = h
    return out, h


def _grouped_run(x, cells: list[GruWeights], h0):
    splits = np.split(x, len(cells), axis=2)
    outs, finals = [], []
    for i, (xs, w) in enumerate(zip(splits, cells)):
        o, hT = _gru_cell_run(xs, w, None if h0 is None else h0[i])
        outs.append(o)
        finals.append(hT)
    return np.concatenate(outs, axis=2), finals


def gru_forward(x: np.ndarray, p: GruParams, h0=None):
    """Run a (grouped, optionally bidirectional) GRU over (N, L, C) input.

    Returns (N, L, H_total) with forward-then-backward concatenation and the
    list of final hidden states per group (forward direction only).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"expected (N, L, C) input, got shape {x.shape}")
    if x.shape[2] % p.groups != 0:
        raise ValueError("input channels not divisible by group count")
    out_f, finals = _grouped_run(x, p.forward, h0)
    if not p.bidirectional:
        return out_f, finals
    out_b, _ = _grouped_run(x[:, ::-1], p.backward, None)
    return np.concatenate([out_f, out_b[:, ::-1]], axis=2), finals


def batchnorm_infer(x, scale, shift, mean, var, eps: float = 1e-5):
    """Per-channel affine normalization with stored statistics."""
    x = check_tensor4(x)
    inv = scale / np.sqrt(var + eps)
    return x * inv[None, :, None, None] + (shift - mean * inv)[None, :, None, None]


def prelu(x: np.ndarray, slopes: np.ndarray) -> np.ndarray:
    """Channelwise parametric ReLU."""
    s = np.asarray(slopes, dtype=np.float64)[None, :, None, None]
    return np.where(x >= 0.0, x, s * x)


def sigmoid(x: np.ndarray) -> np.ndarray:
    return _sigmoid(np.asarray(x, dtype=np.float64))


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=np.float64))


def avgpool_freq(x: np.ndarray) -> np.ndarray:
    """(B, C, T, F) -> (B, C, T) mean over frequency."""
    return check_tensor4(x).mean(axis=3)


def conv1d_causal(x: np.ndarray, weight: np.ndarray, bias: np.ndarray | None = None):
    """Causal 1-D convolution over time, x (B, C, T), weight (out, in, k)."""
    x = np.asarray(x, dtype=np.float64)
    out_ch, in_ch, k = weight.shape
    if x.shape[1] != in_ch:
        raise ValueError(f"input has {x.shape[1]} channels, weight implies {in_ch}")
    xp = np.pad(x, ((0, 0), (0, 0), (k - 1, 0)))
    T = x.shape[2]
    out = np.zeros((x.shape[0], out_ch, T))
    for dt in range(k):
        out += np.einsum("oi,bit->bot", weight[:, :, dt], xp[:, :, dt : dt + T])
    if bias is not None:
        out += bias[None, :, None]
    return out
