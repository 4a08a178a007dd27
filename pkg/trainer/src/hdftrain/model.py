"""Torch replica of the two-stage deep-filtering network.

Layer semantics, tap ordering, and the canonical export names
``stage{1,2}/{encoder|decoder|dprnn|head}/...`` mirror the engine exactly;
weights exported from here load and validate there without translation.
All time-axis operations are causal (past-only padding, unidirectional
inter-frame GRUs).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np
import torch
import torch.nn.functional as tf
from torch import nn

from .bands import band_matrices


@dataclass(frozen=True)
class ModelSettings:
    """Architecture knobs; field names and defaults define the config digest."""

    stage1_channels: int = 16
    stage2_channels: int = 32
    conv_repeats: int = 2
    taconv_repeats: int = 3
    dprnn_repeats: int = 2
    df_order: int = 5
    sbf_k: int = 5
    stage1_mode: str = "TDF"
    stage2_mode: str = "FDF"
    gru_groups: int = 2
    single_stage: bool = False
    n_fft_bins: int = 257
    n_low_kept: int = 65
    n_erb_high: int = 64
    sample_rate: int = 16000


def settings_digest(s: ModelSettings) -> bytes:
    doc = json.dumps(asdict(s), sort_keys=True)
    return hashlib.sha256(doc.encode()).digest()


def filter_taps(mode: str, order: int) -> tuple[int, int]:
    """(temporal_taps, freq_halfwidth) for a filter geometry of odd order."""
    if mode == "CRM":
        return 1, 0
    if mode == "TDF":
        return order, 0
    if mode == "FDF":
        return 1, (order - 1) // 2
    if mode == "DF":
        return order, (order - 1) // 2
    raise ValueError(f"unknown filter mode {mode!r}")


def sbf_expand(x: torch.Tensor, k: int) -> torch.Tensor:
    """(B, C, T, F) -> (B, C*k, T, F), offset-major neighbor replication."""
    half = (k - 1) // 2
    F = x.shape[-1]
    blocks = []
    for d in range(-half, half + 1):
        shifted = tf.pad(x, (max(d, 0), max(-d, 0)))
        o = max(-d, 0)
        blocks.append(shifted[..., o : o + F])
    return torch.cat(blocks, dim=1)


def apply_taps(
    x: torch.Tensor, coeffs: torch.Tensor, temporal_taps: int, freq_halfwidth: int
) -> torch.Tensor:
    """Apply per-bin complex FIR taps: Y(t,f) = sum_ij C(t,f,ij) X(t-i, f-j).

    x: complex (B, T, F); coeffs: real (B, T, F, 2, n_taps), temporal-major
    tap order with frequency offsets -J..J. Differentiable.
    """
    B, T, F = x.shape
    xr, xi = x.real, x.imag
    out_r = torch.zeros_like(xr)
    out_i = torch.zeros_like(xi)
    width = 2 * freq_halfwidth + 1
    for i in range(temporal_taps):
        for jj, j in enumerate(range(-freq_halfwidth, freq_halfwidth + 1)):
            n = i * width + jj
            o = max(-j, 0)
            sr = tf.pad(xr, (max(j, 0), max(-j, 0), i, 0))[:, :T, o : o + F]
            si = tf.pad(xi, (max(j, 0), max(-j, 0), i, 0))[:, :T, o : o + F]
            cr = coeffs[..., 0, n]
            ci = coeffs[..., 1, n]
            out_r = out_r + cr * sr - ci * si
            out_i = out_i + cr * si + ci * sr
    return torch.complex(out_r, out_i)


class ConvBlock(nn.Module):
    """Kernel (1,5), stride (1,2) conv (or its transpose) + BN + PReLU."""

    def __init__(self, c_in: int, c_out: int, transposed: bool = False):
        super().__init__()
        if transposed:
            self.conv = nn.ConvTranspose2d(c_in, c_out, (1, 5), stride=(1, 2), padding=(0, 2))
        else:
            self.conv = nn.Conv2d(c_in, c_out, (1, 5), stride=(1, 2), padding=(0, 2))
        self.bn = nn.BatchNorm2d(c_out)
        self.act = nn.PReLU(c_out, init=0.25)

    def forward(self, x):
        return self.act(self.bn(self.conv(x)))


class TemporalAttention(nn.Module):
    """Frequency-average -> GRU -> causal conv1d -> sigmoid gate."""

    def __init__(self, c: int):
        super().__init__()
        self.gru = nn.GRU(c, c, batch_first=True)
        self.conv = nn.Conv1d(c, c, 3)

    def forward(self, x):  # (B, C, T, F)
        pooled = x.mean(dim=3).transpose(1, 2)  # (B, T, C)
        seq, _ = self.gru(pooled)
        gate = torch.sigmoid(self.conv(tf.pad(seq.transpose(1, 2), (2, 0))))
        return x * gate.unsqueeze(-1)


class TAConv(nn.Module):
    """Pointwise/depthwise conv block with temporal attention and residual."""

    def __init__(self, c: int, sbf_k: int | None):
        super().__init__()
        self.sbf_k = sbf_k
        c_in = c * (sbf_k if sbf_k else 1)
        self.pconv1 = nn.Conv2d(c_in, c, 1)
        self.bn1 = nn.BatchNorm2d(c)
        self.prelu1 = nn.PReLU(c, init=0.25)
        self.dconv = nn.Conv2d(c, c, (3, 3), groups=c)
        self.bn2 = nn.BatchNorm2d(c)
        self.prelu2 = nn.PReLU(c, init=0.25)
        self.ta = TemporalAttention(c)
        self.pconv2 = nn.Conv2d(c, c, 1)

    def forward(self, x):
        h = sbf_expand(x, self.sbf_k) if self.sbf_k else x
        h = self.prelu1(self.bn1(self.pconv1(h)))
        h = self.dconv(tf.pad(h, (1, 1, 2, 0)))  # causal in time, same in freq
        h = self.prelu2(self.bn2(h))
        h = self.ta(h)
        return x + self.pconv2(h)


class GroupedGRU(nn.Module):
    """Channel-split GRUs run in parallel; outputs concatenated group-major."""

    def __init__(self, c: int, groups: int):
        super().__init__()
        h = c // groups
        self.grus = nn.ModuleList(nn.GRU(h, h, batch_first=True) for _ in range(groups))

    def forward(self, x):  # (N, L, C)
        chunks = x.chunk(len(self.grus), dim=2)
        return torch.cat([g(ch)[0] for g, ch in zip(self.grus, chunks)], dim=2)


class DprnnBlock(nn.Module):
    """Bidirectional GRU across frequency, causal GRU across time, residual."""

    def __init__(self, c: int, groups: int):
        super().__init__()
        self.intra_fw = GroupedGRU(c, groups)
        self.intra_bw = GroupedGRU(c, groups)
        self.intra_proj = nn.Linear(2 * c, c)
        self.inter = GroupedGRU(c, groups)
        self.inter_proj = nn.Linear(c, c)

    def forward(self, x):  # (B, C, T, F)
        B, C, T, F = x.shape
        seq = x.permute(0, 2, 3, 1).reshape(B * T, F, C)
        y = torch.cat([self.intra_fw(seq), self.intra_bw(seq.flip(1)).flip(1)], dim=2)
        y = self.intra_proj(y)
        h = x + y.reshape(B, T, F, C).permute(0, 3, 1, 2)
        seq2 = h.permute(0, 3, 2, 1).reshape(B * F, T, C)
        z = self.inter_proj(self.inter(seq2))
        return h + z.reshape(B, F, T, C).permute(0, 3, 2, 1)


class StageNet(nn.Module):
    """One encoder/decoder stage emitting filter coefficients (B,T,F,2,N)."""

    def __init__(self, s: ModelSettings, stage: int):
        super().__init__()
        if s.single_stage:
            in_ch, c, self.use_erb, use_sbf, mode = 3, s.stage2_channels, False, True, s.stage1_mode
        elif stage == 1:
            in_ch, c, self.use_erb, use_sbf, mode = 3, s.stage1_channels, True, False, s.stage1_mode
        else:
            in_ch, c, self.use_erb, use_sbf, mode = 6, s.stage2_channels, False, True, s.stage2_mode
        self.temporal_taps, self.freq_halfwidth = filter_taps(mode, s.df_order)
        self.n_taps = self.temporal_taps * (2 * self.freq_halfwidth + 1)
        if self.use_erb:
            analysis, synthesis = band_matrices(
                s.n_fft_bins, s.sample_rate, s.n_low_kept, s.n_erb_high
            )
            self.register_buffer("analysis", torch.tensor(analysis, dtype=torch.float32))
            self.register_buffer("synthesis", torch.tensor(synthesis, dtype=torch.float32))
        self.enc = nn.ModuleList()
        for i in range(s.conv_repeats):
            self.enc.append(ConvBlock(in_ch if i == 0 else c, c))
        self.taconvs = nn.ModuleList(
            TAConv(c, s.sbf_k if use_sbf else None) for _ in range(s.taconv_repeats)
        )
        self.dprnns = nn.ModuleList(
            DprnnBlock(c, s.gru_groups) for _ in range(s.dprnn_repeats)
        )
        self.dec = nn.ModuleList(ConvBlock(c, c, transposed=True) for _ in range(s.conv_repeats))
        self.head = nn.Conv2d(c, 2 * self.n_taps, 1)
        self.reset_head(identity=stage == 1 or s.single_stage)

    def reset_head(self, identity: bool) -> None:
        """Start from a neutral filter: identity pass-through or zero residual.

        Training then begins at the noisy baseline (stage 1) or exactly at
        the stage-1 solution (stage 2) instead of a destructive random
        filter.
        """
        with torch.no_grad():
            self.head.weight.zero_()
            self.head.bias.zero_()
            if identity:
                # real part of the current-frame, zero-offset tap
                self.head.bias[self.freq_halfwidth] = 1.0

    def forward(self, feat):  # (B, C_in, T, F_linear)
        h = feat
        if self.use_erb:
            h = torch.matmul(h, self.analysis.to(h.dtype).t())
        skips = []
        for blk in self.enc:
            h = blk(h)
            skips.append(h)
        for blk in self.taconvs:
            h = blk(h)
        for blk in self.dprnns:
            h = blk(h)
        for i, blk in enumerate(self.dec):
            h = h + skips[len(self.dec) - 1 - i]
            h = blk(h)
        coef = torch.tanh(self.head(h))
        if self.use_erb:
            coef = torch.matmul(coef, self.synthesis.to(coef.dtype).t())
        B, _, T, F = coef.shape
        return coef.reshape(B, 2, self.n_taps, T, F).permute(0, 3, 4, 1, 2)


def _feature_stack(x: torch.Tensor, s1: torch.Tensor | None = None) -> torch.Tensor:
    def mag(z):
        return torch.sqrt(z.real**2 + z.imag**2 + 1e-12)

    if s1 is None:
        chans = [mag(x), x.real, x.imag]
    else:
        chans = [mag(x), x.imag, x.real, mag(s1), s1.imag, s1.real]
    return torch.stack(chans, dim=1)


class TwoStageModel(nn.Module):
    """Full pipeline over a complex spectrogram batch (B, T, F)."""

    def __init__(self, settings: ModelSettings = ModelSettings()):
        super().__init__()
        self.settings = settings
        self.stage1 = StageNet(settings, 1)
        self.stage2 = None if settings.single_stage else StageNet(settings, 2)

    def forward(
        self, x: torch.Tensor, stage1_only: bool = False
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (S1, S); for single-stage configurations S is S1."""
        dtype = self.stage1.head.weight.dtype
        feat = _feature_stack(x).to(dtype)
        c1 = self.stage1(feat)
        s1 = apply_taps(x, c1, self.stage1.temporal_taps, self.stage1.freq_halfwidth)
        if self.stage2 is None or stage1_only:
            return s1, s1
        feat2 = _feature_stack(x, s1).to(dtype)
        c2 = self.stage2(feat2)
        s2 = apply_taps(x, c2, self.stage2.temporal_taps, self.stage2.freq_halfwidth)
        return s1, s1 + s2

    # --- canonical export -------------------------------------------------

    def export_tensors(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        stages = [("stage1", self.stage1)]
        if self.stage2 is not None:
            stages.append(("stage2", self.stage2))
        for pfx, net in stages:
            out.update(_export_stage(pfx, net))
        return out


def _np(t: torch.Tensor) -> np.ndarray:
    return t.detach().cpu().to(torch.float32).numpy().copy()


def _export_conv_block(name: str, blk: ConvBlock) -> dict[str, np.ndarray]:
    return {
        f"{name}/weight": _np(blk.conv.weight),
        f"{name}/bias": _np(blk.conv.bias),
        f"{name}/bn/scale": _np(blk.bn.weight),
        f"{name}/bn/shift": _np(blk.bn.bias),
        f"{name}/bn/mean": _np(blk.bn.running_mean),
        f"{name}/bn/var": _np(blk.bn.running_var),
        f"{name}/prelu": _np(blk.act.weight),
    }


def _export_bn(name: str, bn: nn.BatchNorm2d) -> dict[str, np.ndarray]:
    return {
        f"{name}/scale": _np(bn.weight),
        f"{name}/shift": _np(bn.bias),
        f"{name}/mean": _np(bn.running_mean),
        f"{name}/var": _np(bn.running_var),
    }


def _export_gru(name: str, gru: nn.GRU, keys=("w_ih", "w_hh", "b_ih", "b_hh")) -> dict:
    params = (gru.weight_ih_l0, gru.weight_hh_l0, gru.bias_ih_l0, gru.bias_hh_l0)
    return {f"{name}/{k}": _np(p) for k, p in zip(keys, params)}


def _export_stage(pfx: str, net: StageNet) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    for i, blk in enumerate(net.enc):
        out.update(_export_conv_block(f"{pfx}/encoder/conv{i}", blk))
    for i, blk in enumerate(net.taconvs):
        b = f"{pfx}/encoder/taconv{i}"
        out[f"{b}/pconv1/weight"] = _np(blk.pconv1.weight)
        out[f"{b}/pconv1/bias"] = _np(blk.pconv1.bias)
        out.update(_export_bn(f"{b}/bn1", blk.bn1))
        out[f"{b}/prelu1"] = _np(blk.prelu1.weight)
        out[f"{b}/dconv/weight"] = _np(blk.dconv.weight)
        out[f"{b}/dconv/bias"] = _np(blk.dconv.bias)
        out.update(_export_bn(f"{b}/bn2", blk.bn2))
        out[f"{b}/prelu2"] = _np(blk.prelu2.weight)
        out.update(
            _export_gru(f"{b}/ta", blk.ta.gru, ("gru_w_ih", "gru_w_hh", "gru_b_ih", "gru_b_hh"))
        )
        out[f"{b}/ta/conv_weight"] = _np(blk.ta.conv.weight)
        out[f"{b}/ta/conv_bias"] = _np(blk.ta.conv.bias)
        out[f"{b}/pconv2/weight"] = _np(blk.pconv2.weight)
        out[f"{b}/pconv2/bias"] = _np(blk.pconv2.bias)
    for i, blk in enumerate(net.dprnns):
        b = f"{pfx}/dprnn/block{i}"
        for d, gg in (("fw", blk.intra_fw), ("bw", blk.intra_bw)):
            for j, gru in enumerate(gg.grus):
                out.update(_export_gru(f"{b}/intra/{d}/g{j}", gru))
        out[f"{b}/intra/proj/weight"] = _np(blk.intra_proj.weight)
        out[f"{b}/intra/proj/bias"] = _np(blk.intra_proj.bias)
        for j, gru in enumerate(blk.inter.grus):
            out.update(_export_gru(f"{b}/inter/g{j}", gru))
        out[f"{b}/inter/proj/weight"] = _np(blk.inter_proj.weight)
        out[f"{b}/inter/proj/bias"] = _np(blk.inter_proj.bias)
    for i, blk in enumerate(net.dec):
        out.update(_export_conv_block(f"{pfx}/decoder/deconv{i}", blk))
    out[f"{pfx}/head/weight"] = _np(net.head.weight)
    out[f"{pfx}/head/bias"] = _np(net.head.bias)
    return out
