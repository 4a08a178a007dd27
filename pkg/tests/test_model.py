import numpy as np
import pytest

from hdfnet.model import (
    ModelConfig,
    WeightBundle,
    WeightValidationError,
    _scope,
    config_digest,
    dprnn_forward,
    expected_shapes,
    hdf_enhance,
    init_random_weights,
    macs_per_second,
    param_count,
    ta_forward,
    taconv_forward,
    tacrn_forward,
    validate_weights,
)
from hdfnet.spectral import ComplexSpectrogram, build_feature_stack

CFG = ModelConfig()


def random_spec(rng, T=10, F=257):
    return ComplexSpectrogram(rng.normal(size=(T, F)) + 1j * rng.normal(size=(T, F)))


def make_weights(seed=0, cfg=CFG):
    return init_random_weights(cfg, np.random.default_rng(seed))


def ta_params(rng, c, unit_gate=False):
    p = {
        "gru_w_ih": rng.normal(size=(3 * c, c)) * 0.2,
        "gru_w_hh": rng.normal(size=(3 * c, c)) * 0.2,
        "gru_b_ih": np.zeros(3 * c),
        "gru_b_hh": np.zeros(3 * c),
        "conv_weight": rng.normal(size=(c, c, 3)) * 0.2,
        "conv_bias": np.zeros(c),
    }
    if unit_gate:
        p["conv_weight"] = np.zeros((c, c, 3))
        p["conv_bias"] = np.full(c, 60.0)  # sigmoid saturates to exactly 1.0
    return p


def test_ta_unit_gate_is_identity(rng):
    x = rng.normal(size=(1, 4, 6, 5))
    out = ta_forward(x, ta_params(rng, 4, unit_gate=True))
    assert np.array_equal(out, x)


def test_ta_zero_gate_limit(rng):
    x = rng.normal(size=(1, 4, 6, 5))
    p = ta_params(rng, 4)
    p["conv_weight"] = np.zeros((4, 4, 3))
    p["conv_bias"] = np.full(4, -60.0)
    out = ta_forward(x, p)
    assert np.max(np.abs(out)) < 1e-20


def test_ta_causality(rng):
    x = rng.normal(size=(1, 3, 8, 5))
    p = ta_params(rng, 3)
    ref = ta_forward(x, p)
    x2 = x.copy()
    x2[:, :, 6:] += 1.0
    out = ta_forward(x2, p)
    assert np.array_equal(ref[:, :, :6], out[:, :, :6])


def _taconv_params(rng, c, k=1, zero_inner=False):
    scale = 0.0 if zero_inner else 0.2

    def t(shape):
        return rng.normal(size=shape) * scale

    p = {
        "pconv1/weight": t((c, c * k, 1, 1)),
        "pconv1/bias": np.zeros(c),
        "dconv/weight": t((c, 1, 3, 3)),
        "dconv/bias": np.zeros(c),
        "pconv2/weight": t((c, c, 1, 1)),
        "pconv2/bias": np.zeros(c),
        "ta/gru_w_ih": t((3 * c, c)),
        "ta/gru_w_hh": t((3 * c, c)),
        "ta/gru_b_ih": np.zeros(3 * c),
        "ta/gru_b_hh": np.zeros(3 * c),
        "ta/conv_weight": t((c, c, 3)),
        "ta/conv_bias": np.zeros(c),
    }
    for bn in ("bn1", "bn2"):
        p[f"{bn}/scale"] = np.ones(c)
        p[f"{bn}/shift"] = np.zeros(c)
        p[f"{bn}/mean"] = np.zeros(c)
        p[f"{bn}/var"] = np.ones(c)
    p["prelu1"] = np.full(c, 0.25)
    p["prelu2"] = np.full(c, 0.25)
    return p


def test_taconv_residual_identity(rng):
    x = rng.normal(size=(1, 4, 5, 6))
    out = taconv_forward(x, _taconv_params(rng, 4, zero_inner=True))
    assert np.array_equal(out, x)


def test_taconv_sbf_k1_equals_disabled(rng):
    x = rng.normal(size=(1, 4, 5, 6))
    p = _taconv_params(rng, 4, k=1)
    assert np.array_equal(taconv_forward(x, p, sbf_k=1), taconv_forward(x, p, sbf_k=None))


def test_taconv_preserves_channels(rng):
    x = rng.normal(size=(1, 4, 5, 6))
    p5 = _taconv_params(rng, 4, k=5)
    assert taconv_forward(x, p5, sbf_k=5).shape == x.shape
    p1 = _taconv_params(rng, 4, k=1)
    assert taconv_forward(x, p1).shape == x.shape


def _dprnn_params(rng, c, g, zero=False):
    h = c // g
    scale = 0.0 if zero else 0.2

    def t(shape):
        return rng.normal(size=shape) * scale

    p = {}
    for d in ("fw", "bw"):
        for j in range(g):
            p[f"intra/{d}/g{j}/w_ih"] = t((3 * h, h))
            p[f"intra/{d}/g{j}/w_hh"] = t((3 * h, h))
            p[f"intra/{d}/g{j}/b_ih"] = np.zeros(3 * h)
            p[f"intra/{d}/g{j}/b_hh"] = np.zeros(3 * h)
    p["intra/proj/weight"] = t((c, 2 * c))
    p["intra/proj/bias"] = np.zeros(c)
    for j in range(g):
        p[f"inter/g{j}/w_ih"] = t((3 * h, h))
        p[f"inter/g{j}/w_hh"] = t((3 * h, h))
        p[f"inter/g{j}/b_ih"] = np.zeros(3 * h)
        p[f"inter/g{j}/b_hh"] = np.zeros(3 * h)
    p["inter/proj/weight"] = t((c, c))
    p["inter/proj/bias"] = np.zeros(c)
    return p


def test_dprnn_zero_weights_identity(rng):
    x = rng.normal(size=(1, 4, 5, 6))
    out = dprnn_forward(x, _dprnn_params(rng, 4, 2, zero=True), groups=2)
    assert np.array_equal(out, x)


def test_dprnn_shape_and_causality(rng):
    x = rng.normal(size=(1, 4, 8, 6))
    p = _dprnn_params(rng, 4, 2)
    ref = dprnn_forward(x, p, groups=2)
    assert ref.shape == x.shape
    x2 = x.copy()
    x2[:, :, 6:] += 1.0
    out = dprnn_forward(x2, p, groups=2)
    assert np.array_equal(ref[:, :, :6], out[:, :, :6])


def test_tacrn_head_shape(rng):
    weights = make_weights()
    x = random_spec(rng, T=6)
    feat = build_feature_stack(x)
    out = tacrn_forward(feat, weights.tensors, CFG, stage=1)
    assert out.shape == (1, 6, 257, 2, 5)
    s1 = random_spec(rng, T=6)
    out2 = tacrn_forward(build_feature_stack(x, s1), weights.tensors, CFG, stage=2)
    assert out2.shape == (1, 6, 257, 2, 5)


def test_zero_heads_give_zero_output(rng):
    weights = make_weights()
    for name in list(weights.tensors):
        if "/head/" in name:
            weights.tensors[name] = np.zeros_like(weights.tensors[name])
    x = random_spec(rng, T=5)
    out = hdf_enhance(x, weights, CFG)
    assert np.all(out.data == 0)


def test_stage2_head_zero_degenerates_to_stage1(rng):
    weights = make_weights()
    x = random_spec(rng, T=5)
    full = hdf_enhance(x, weights, CFG)
    weights2 = WeightBundle(dict(weights.tensors), CFG)
    for name in list(weights2.tensors):
        if name.startswith("stage2/head/"):
            weights2.tensors[name] = np.zeros_like(weights2.tensors[name])
    s1_only = hdf_enhance(x, weights2, CFG)
    # with the stage-2 head zeroed the residual sum collapses to S1
    feat = build_feature_stack(x)
    co = tacrn_forward(feat, weights.tensors, CFG, 1)
    assert not np.array_equal(full.data, s1_only.data)
    assert np.all(np.isfinite(s1_only.data))


def test_enhance_deterministic_and_finite(rng):
    weights = make_weights(3)
    x = random_spec(rng, T=7)
    a = hdf_enhance(x, weights, CFG)
    b = hdf_enhance(x, weights, CFG)
    assert a.data.shape == x.data.shape
    assert np.all(np.isfinite(a.data))
    assert np.array_equal(a.data, b.data)


def _causality_probe(cfg, seed, T=10):
    rng = np.random.default_rng(seed)
    weights = init_random_weights(cfg, np.random.default_rng(seed + 999))
    x = random_spec(rng, T=T)
    t0 = T // 2
    ref = hdf_enhance(x, weights, cfg).data
    pert = x.data.copy()
    pert[t0 + 1 :] += rng.normal(size=(T - t0 - 1, 257))
    out = hdf_enhance(ComplexSpectrogram(pert), weights, cfg).data
    return np.array_equal(ref[: t0 + 1], out[: t0 + 1])


def test_end_to_end_causality():
    assert _causality_probe(CFG, seed=0)
    assert _causality_probe(CFG, seed=1)


MODE_GRID = [
    ("CRM", "CRM"),
    ("CRM", "FDF"),
    ("TDF", "CRM"),
    ("TDF", "TDF"),
    ("FDF", "TDF"),
    ("TDF", "FDF"),
]


@pytest.mark.parametrize("m1,m2", MODE_GRID)
def test_mode_grid_runs_and_causal(m1, m2):
    cfg = ModelConfig(stage1_mode=m1, stage2_mode=m2)
    assert _causality_probe(cfg, seed=7, T=8)


def test_single_stage_df_path():
    cfg = ModelConfig(single_stage=True, stage1_mode="DF")
    shapes = expected_shapes(cfg)
    assert "stage1/head/weight" in shapes
    assert shapes["stage1/head/weight"][0] == 2 * 25  # I=4, J=2 -> 25 taps
    assert not any(k.startswith("stage2/") for k in shapes)
    assert _causality_probe(cfg, seed=5, T=8)


def test_param_count_in_band():
    total = param_count(CFG)
    assert 0.10e6 <= total <= 0.40e6


def test_macs_in_band():
    macs = macs_per_second(CFG)
    assert 0.2e9 <= macs <= 0.9e9


def test_param_growth_with_channels():
    doubled = ModelConfig(stage1_channels=32, stage2_channels=64)
    ratio = param_count(doubled) / param_count(CFG)
    assert 2.0 < ratio < 4.0


def test_validate_weights_errors():
    weights = make_weights()
    missing = WeightBundle(dict(weights.tensors), CFG)
    del missing.tensors["stage1/head/bias"]
    with pytest.raises(WeightValidationError, match="stage1/head/bias"):
        validate_weights(missing, CFG)
    bad = WeightBundle(dict(weights.tensors), CFG)
    bad.tensors["stage1/head/bias"] = np.zeros(3, dtype=np.float32)
    with pytest.raises(WeightValidationError, match="shape mismatch"):
        validate_weights(bad, CFG)
    extra = WeightBundle(dict(weights.tensors), CFG)
    extra.tensors["stage3/bogus"] = np.zeros(1, dtype=np.float32)
    with pytest.raises(WeightValidationError, match="unexpected"):
        validate_weights(extra, CFG)


def test_config_digest_changes_with_config():
    assert config_digest(CFG) != config_digest(ModelConfig(stage1_channels=32))
    assert len(config_digest(CFG)) == 32
