"""Two-stage enhancement model: encoder/decoder, attention conv, dual-path
RNN, coefficient heads, and the full forward pass.

Weights live in a flat name -> array map (see :func:`expected_shapes` for
the canonical naming scheme ``stage{1,2}/{encoder|decoder|dprnn|head}/...``).
A loaded bundle is immutable and shared; every forward call allocates its
own activations, so enhancement is safe to run from multiple threads.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import nncore
from .erb import ErbFilterbank, build_erb_filterbank, erb_analyze, erb_synthesize
from .filtering import FilterCoeffs, FilterSpec, SbfSpec, apply_filter, sbf_expand
from .nncore import (
    ConvParams,
    GruParams,
    GruWeights,
    avgpool_freq,
    batchnorm_infer,
    conv1d_causal,
    conv2d,
    deconv2d,
    prelu,
    sigmoid,
)
from .spectral import ComplexSpectrogram, StftParams, build_feature_stack

BUNDLE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
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

    def __post_init__(self):
        FilterSpec.from_order(self.stage1_mode, self.df_order)
        if not self.single_stage:
            FilterSpec.from_order(self.stage2_mode, self.df_order)
        for c in (self.stage1_channels, self.stage2_channels):
            if c % self.gru_groups != 0:
                raise ValueError("stage channels must divide by gru_groups")
        SbfSpec(self.sbf_k)
        if self.n_low_kept + self.n_erb_high < 1:
            raise ValueError("need at least one band")


def config_digest(cfg: ModelConfig) -> bytes:
    """Stable 32-byte digest of the full configuration."""
    doc = json.dumps(asdict(cfg), sort_keys=True)
    return hashlib.sha256(doc.encode()).digest()


@dataclass
class WeightBundle:
    tensors: dict[str, np.ndarray]
    config: ModelConfig

    def __post_init__(self):
        self.tensors = {k: np.asarray(v, dtype=np.float32) for k, v in self.tensors.items()}


class _StageSettings:
    def __init__(self, cfg: ModelConfig, stage: int):
        if cfg.single_stage:
            if stage != 1:
                raise ValueError("single-stage config has only stage 1")
            self.in_channels = 3
            self.channels = cfg.stage2_channels
            self.use_erb = False
            self.use_sbf = True
            self.mode = cfg.stage1_mode
        elif stage == 1:
            self.in_channels = 3
            self.channels = cfg.stage1_channels
            self.use_erb = True
            self.use_sbf = False
            self.mode = cfg.stage1_mode
        elif stage == 2:
            self.in_channels = 6
            self.channels = cfg.stage2_channels
            self.use_erb = False
            self.use_sbf = True
            self.mode = cfg.stage2_mode
        else:
            raise ValueError(f"stage must be 1 or 2, got {stage}")
        self.entry_bins = (
            cfg.n_low_kept + cfg.n_erb_high if self.use_erb else cfg.n_fft_bins
        )
        self.filter_spec = FilterSpec.from_order(self.mode, cfg.df_order)

    def freq_ladder(self, repeats: int) -> list[int]:
        """Frequency sizes after each downsampling conv, entry first."""
        sizes = [self.entry_bins]
        for _ in range(repeats):
            sizes.append((sizes[-1] + 2 * 2 - 5) // 2 + 1)
        return sizes


def _add_bn(shapes: dict, block: str, c: int) -> None:
    for t in ("scale", "shift", "mean", "var"):
        shapes[f"{block}/{t}"] = (c,)


def expected_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Canonical layer-name -> shape table implied by a configuration."""
    shapes: dict[str, tuple[int, ...]] = {}
    stages = (1,) if cfg.single_stage else (1, 2)
    for s in stages:
        st = _StageSettings(cfg, s)
        c, g = st.channels, cfg.gru_groups
        h = c // g
        pfx = f"stage{s}"
        for i in range(cfg.conv_repeats):
            b = f"{pfx}/encoder/conv{i}"
            shapes[f"{b}/weight"] = (c, st.in_channels if i == 0 else c, 1, 5)
            shapes[f"{b}/bias"] = (c,)
            _add_bn(shapes, f"{b}/bn", c)
            shapes[f"{b}/prelu"] = (c,)
        for i in range(cfg.taconv_repeats):
            b = f"{pfx}/encoder/taconv{i}"
            c_in = c * (cfg.sbf_k if st.use_sbf else 1)
            shapes[f"{b}/pconv1/weight"] = (c, c_in, 1, 1)
            shapes[f"{b}/pconv1/bias"] = (c,)
            _add_bn(shapes, f"{b}/bn1", c)
            shapes[f"{b}/prelu1"] = (c,)
            shapes[f"{b}/dconv/weight"] = (c, 1, 3, 3)
            shapes[f"{b}/dconv/bias"] = (c,)
            _add_bn(shapes, f"{b}/bn2", c)
            shapes[f"{b}/prelu2"] = (c,)
            shapes[f"{b}/ta/gru_w_ih"] = (3 * c, c)
            shapes[f"{b}/ta/gru_w_hh"] = (3 * c, c)
            shapes[f"{b}/ta/gru_b_ih"] = (3 * c,)
            shapes[f"{b}/ta/gru_b_hh"] = (3 * c,)
            shapes[f"{b}/ta/conv_weight"] = (c, c, 3)
            shapes[f"{b}/ta/conv_bias"] = (c,)
            shapes[f"{b}/pconv2/weight"] = (c, c, 1, 1)
            shapes[f"{b}/pconv2/bias"] = (c,)
        for i in range(cfg.dprnn_repeats):
            b = f"{pfx}/dprnn/block{i}"
            for d in ("fw", "bw"):
                for j in range(g):
                    shapes[f"{b}/intra/{d}/g{j}/w_ih"] = (3 * h, h)
                    shapes[f"{b}/intra/{d}/g{j}/w_hh"] = (3 * h, h)
                    shapes[f"{b}/intra/{d}/g{j}/b_ih"] = (3 * h,)
                    shapes[f"{b}/intra/{d}/g{j}/b_hh"] = (3 * h,)
            shapes[f"{b}/intra/proj/weight"] = (c, 2 * c)
            shapes[f"{b}/intra/proj/bias"] = (c,)
            for j in range(g):
                shapes[f"{b}/inter/g{j}/w_ih"] = (3 * h, h)
                shapes[f"{b}/inter/g{j}/w_hh"] = (3 * h, h)
                shapes[f"{b}/inter/g{j}/b_ih"] = (3 * h,)
                shapes[f"{b}/inter/g{j}/b_hh"] = (3 * h,)
            shapes[f"{b}/inter/proj/weight"] = (c, c)
            shapes[f"{b}/inter/proj/bias"] = (c,)
        for i in range(cfg.conv_repeats):
            b = f"{pfx}/decoder/deconv{i}"
            shapes[f"{b}/weight"] = (c, c, 1, 5)
            shapes[f"{b}/bias"] = (c,)
            _add_bn(shapes, f"{b}/bn", c)
            shapes[f"{b}/prelu"] = (c,)
        n = st.filter_spec.n_taps
        shapes[f"{pfx}/head/weight"] = (2 * n, c, 1, 1)
        shapes[f"{pfx}/head/bias"] = (2 * n,)
    return shapes


class WeightValidationError(ValueError):
    pass


def validate_weights(bundle: WeightBundle, cfg: ModelConfig) -> None:
    """Check every expected layer is present with the right shape, no extras."""
    expected = expected_shapes(cfg)
    for name, shape in expected.items():
        if name not in bundle.tensors:
            raise WeightValidationError(f"missing layer: {name}")
        got = bundle.tensors[name].shape
        if tuple(got) != shape:
            raise WeightValidationError(
                f"shape mismatch for {name}: bundle has {tuple(got)}, expected {shape}"
            )
    extras = set(bundle.tensors) - set(expected)
    if extras:
        raise WeightValidationError(f"unexpected layers: {sorted(extras)}")


def init_random_weights(cfg: ModelConfig, rng: np.random.Generator) -> WeightBundle:
    """Random bundle for tests and untrained runs; BN statistics are identity."""
    tensors = {}
    for name, shape in expected_shapes(cfg).items():
        leaf = name.rsplit("/", 1)[-1]
        if name.split("/")[-2].startswith("bn"):
            if leaf in ("scale", "var"):
                tensors[name] = np.ones(shape, dtype=np.float32)
            else:
                tensors[name] = np.zeros(shape, dtype=np.float32)
        elif leaf == "prelu" or leaf.startswith("prelu"):
            tensors[name] = np.full(shape, 0.25, dtype=np.float32)
        else:
            fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
            bound = 1.0 / math.sqrt(max(fan_in, 1))
            tensors[name] = rng.uniform(-bound, bound, size=shape).astype(np.float32)
    return WeightBundle(tensors, cfg)


def _scope(tensors: dict, prefix: str) -> dict:
    cut = len(prefix) + 1
    return {k[cut:]: v for k, v in tensors.items() if k.startswith(prefix + "/")}


def _conv_block(x, p: dict, stride=(1, 2), pad_f=2, transposed=False):
    params = ConvParams(
        p["weight"], p["bias"], stride=stride, pad_f=pad_f, transposed=transposed
    )
    y = deconv2d(x, params) if transposed else conv2d(x, params)
    y = batchnorm_infer(y, p["bn/scale"], p["bn/shift"], p["bn/mean"], p["bn/var"])
    return prelu(y, p["prelu"])


def ta_forward(x: np.ndarray, params: dict) -> np.ndarray:
    """Temporal attention gate: freq average -> GRU -> causal conv -> sigmoid."""
    pooled = avgpool_freq(x)
    seq = pooled.transpose(0, 2, 1)
    cell = GruWeights(
        params["gru_w_ih"], params["gru_w_hh"], params["gru_b_ih"], params["gru_b_hh"]
    )
    out, _ = nncore.gru_forward(seq, GruParams([cell]))
    gate = sigmoid(
        conv1d_causal(out.transpose(0, 2, 1), params["conv_weight"], params["conv_bias"])
    )
    return x * gate[:, :, :, None]


def taconv_forward(x: np.ndarray, params: dict, sbf_k: int | None = None) -> np.ndarray:
    """Pointwise/depthwise conv block with temporal attention and residual."""
    h = sbf_expand(x, SbfSpec(sbf_k)) if sbf_k is not None else x
    h = conv2d(h, ConvParams(params["pconv1/weight"], params["pconv1/bias"]))
    h = batchnorm_infer(
        h, params["bn1/scale"], params["bn1/shift"], params["bn1/mean"], params["bn1/var"]
    )
    h = prelu(h, params["prelu1"])
    c = h.shape[1]
    h = conv2d(
        h,
        ConvParams(params["dconv/weight"], params["dconv/bias"], groups=c, pad_f=1),
    )
    h = batchnorm_infer(
        h, params["bn2/scale"], params["bn2/shift"], params["bn2/mean"], params["bn2/var"]
    )
    h = prelu(h, params["prelu2"])
    h = ta_forward(h, _scope(params, "ta"))
    h = conv2d(h, ConvParams(params["pconv2/weight"], params["pconv2/bias"]))
    return x + h


def dprnn_forward(x: np.ndarray, params: dict, groups: int) -> np.ndarray:
    """Bi-GRU across frequency, then causal uni-GRU across time, both residual."""
    B, C, T, F = x.shape
    fw = [
        GruWeights(*(params[f"intra/fw/g{j}/{t}"] for t in ("w_ih", "w_hh", "b_ih", "b_hh")))
        for j in range(groups)
    ]
    bw = [
        GruWeights(*(params[f"intra/bw/g{j}/{t}"] for t in ("w_ih", "w_hh", "b_ih", "b_hh")))
        for j in range(groups)
    ]
    seq = x.transpose(0, 2, 3, 1).reshape(B * T, F, C)
    y, _ = nncore.gru_forward(seq, GruParams(fw, bw))
    y = y @ params["intra/proj/weight"].T + params["intra/proj/bias"]
    h = x + y.reshape(B, T, F, C).transpose(0, 3, 1, 2)

    inter = [
        GruWeights(*(params[f"inter/g{j}/{t}"] for t in ("w_ih", "w_hh", "b_ih", "b_hh")))
        for j in range(groups)
    ]
    seq2 = h.transpose(0, 3, 2, 1).reshape(B * F, T, C)
    z, _ = nncore.gru_forward(seq2, GruParams(inter))
    z = z @ params["inter/proj/weight"].T + params["inter/proj/bias"]
    return h + z.reshape(B, F, T, C).transpose(0, 3, 2, 1)


def tacrn_forward(
    x: np.ndarray, tensors: dict, cfg: ModelConfig, stage: int
) -> np.ndarray:
    """Full encoder/decoder pass; returns coefficients (B, T, F, 2, n_taps).

    The head output is tanh-bounded. For the ERB stage the head works at
    band resolution and each tap is expanded back to linear bins.
    """
    st = _StageSettings(cfg, stage)
    pfx = f"stage{stage}"
    if x.shape[1] != st.in_channels:
        raise ValueError(f"stage {stage} expects {st.in_channels} input channels")
    fb = None
    h = x
    if st.use_erb:
        fb = build_erb_filterbank(
            cfg.n_fft_bins, cfg.sample_rate, cfg.n_low_kept, cfg.n_erb_high
        )
        h = erb_analyze(h, fb)
    skips = []
    for i in range(cfg.conv_repeats):
        h = _conv_block(h, _scope(tensors, f"{pfx}/encoder/conv{i}"))
        skips.append(h)
    for i in range(cfg.taconv_repeats):
        h = taconv_forward(
            h,
            _scope(tensors, f"{pfx}/encoder/taconv{i}"),
            cfg.sbf_k if st.use_sbf else None,
        )
    for i in range(cfg.dprnn_repeats):
        h = dprnn_forward(h, _scope(tensors, f"{pfx}/dprnn/block{i}"), cfg.gru_groups)
    for i in range(cfg.conv_repeats):
        h = h + skips[cfg.conv_repeats - 1 - i]
        h = _conv_block(h, _scope(tensors, f"{pfx}/decoder/deconv{i}"), transposed=True)
    head = conv2d(
        h, ConvParams(tensors[f"{pfx}/head/weight"], tensors[f"{pfx}/head/bias"])
    )
    coef = np.tanh(head)
    if st.use_erb:
        coef = erb_synthesize(coef, fb)
    B, _, T, F = coef.shape
    n = st.filter_spec.n_taps
    return coef.reshape(B, 2, n, T, F).transpose(0, 3, 4, 1, 2)


def _coeffs_from_head(out: np.ndarray, spec: FilterSpec) -> FilterCoeffs:
    return FilterCoeffs(out[0, :, :, 0, :], out[0, :, :, 1, :], spec)


def hdf_enhance(
    x: ComplexSpectrogram, weights: WeightBundle, cfg: ModelConfig
) -> ComplexSpectrogram:
    """Run the full two-stage forward pass on one spectrogram."""
    validate_weights(weights, cfg)
    t = weights.tensors
    st1 = _StageSettings(cfg, 1)
    feat = build_feature_stack(x)
    c1 = _coeffs_from_head(tacrn_forward(feat, t, cfg, 1), st1.filter_spec)
    s1 = apply_filter(x, c1)
    if cfg.single_stage:
        return s1
    st2 = _StageSettings(cfg, 2)
    feat2 = build_feature_stack(x, s1)
    c2 = _coeffs_from_head(tacrn_forward(feat2, t, cfg, 2), st2.filter_spec)
    s2 = apply_filter(x, c2)
    return ComplexSpectrogram(s1.data + s2.data, params=x.params)


def param_count(cfg: ModelConfig) -> int:
    """Exact trainable-parameter total implied by the configuration."""
    return int(sum(np.prod(s) for s in expected_shapes(cfg).values()))


def macs_per_second(cfg: ModelConfig, stft: StftParams = StftParams()) -> float:
    """Analytic multiply-accumulate count per second of 16 kHz audio.

    Complex multiplies count as 4 real MACs; the band-mapping matrices are
    counted dense, matching the implementation.
    """
    frames_per_second = cfg.sample_rate / stft.hop
    total = 0.0  # per frame
    stages = (1,) if cfg.single_stage else (1, 2)
    for s in stages:
        st = _StageSettings(cfg, s)
        c, g = st.channels, cfg.gru_groups
        h = c // g
        ladder = st.freq_ladder(cfg.conv_repeats)
        n_bands = st.entry_bins
        if st.use_erb:
            total += st.in_channels * n_bands * cfg.n_fft_bins  # analysis matmul
        for i in range(cfg.conv_repeats):
            c_in = st.in_channels if i == 0 else c
            total += c * ladder[i + 1] * c_in * 5
        f_mid = ladder[-1]
        for _ in range(cfg.taconv_repeats):
            c_in = c * (cfg.sbf_k if st.use_sbf else 1)
            total += c * f_mid * c_in            # pconv1
            total += c * f_mid * 9               # depthwise 3x3
            total += 3 * c * (c + c)             # TA GRU step
            total += c * c * 3                   # TA causal conv1d
            total += c * f_mid * c               # pconv2
        for _ in range(cfg.dprnn_repeats):
            gru_step = g * 3 * h * (h + h)       # grouped cell, one step
            total += f_mid * 2 * gru_step        # intra, both directions
            total += f_mid * c * 2 * c           # intra projection
            total += f_mid * gru_step            # inter, one step per bin
            total += f_mid * c * c               # inter projection
        for i in range(cfg.conv_repeats):
            total += c * ladder[cfg.conv_repeats - 1 - i] * c * 5
        n = st.filter_spec.n_taps
        total += 2 * n * c * ladder[0]           # head
        if st.use_erb:
            total += 2 * n * n_bands * cfg.n_fft_bins  # coefficient expansion
        total += 4 * n * cfg.n_fft_bins          # complex filtering
    return total * frames_per_second
