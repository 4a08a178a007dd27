import numpy as np
import pytest

from hdfnet.nncore import (
    ConvParams,
    GruParams,
    GruWeights,
    avgpool_freq,
    batchnorm_infer,
    conv1d_causal,
    conv2d,
    deconv2d,
    gru_forward,
    prelu,
    sigmoid,
)
from oracles import batchnorm_loops, conv2d_loops, deconv2d_loops


def test_pointwise_identity():
    x = np.random.default_rng(0).normal(size=(1, 2, 4, 5))
    w = np.eye(2)[:, :, None, None]
    out = conv2d(x, ConvParams(w))
    assert np.array_equal(out, x)


def test_frequency_downsampling_arithmetic(rng):
    x = rng.normal(size=(1, 3, 4, 129))
    w = rng.normal(size=(8, 3, 1, 5))
    out = conv2d(x, ConvParams(w, stride=(1, 2), pad_f=2))
    assert out.shape == (1, 8, 4, 65)


@pytest.mark.parametrize("groups,stride", [(1, (1, 1)), (2, (1, 2)), (4, (1, 1))])
def test_conv_matches_naive_loops(rng, groups, stride):
    B, C_in, T, F = 2, 4, 5, 8
    C_out, kt, kf = 4, 3, 3
    x = rng.normal(size=(B, C_in, T, F))
    w = rng.normal(size=(C_out, C_in // groups, kt, kf))
    b = rng.normal(size=C_out)
    got = conv2d(x, ConvParams(w, b, stride=stride, groups=groups, pad_f=1))
    want = conv2d_loops(x, w, b, stride, groups, pad_t=kt - 1, pad_f=1)
    assert got.shape == want.shape
    assert np.max(np.abs(got - want)) < 1e-10


def test_conv_causal_bit_exact(rng):
    x = rng.normal(size=(1, 2, 8, 6))
    w = rng.normal(size=(3, 2, 3, 3))
    p = ConvParams(w, pad_f=1)
    ref = conv2d(x, p)
    x2 = x.copy()
    x2[:, :, 5:] += rng.normal(size=(1, 2, 3, 6))
    out = conv2d(x2, p)
    assert np.array_equal(ref[:, :, :5], out[:, :, :5])


def test_depthwise_equals_independent_convs(rng):
    C = 3
    x = rng.normal(size=(1, C, 6, 7))
    w = rng.normal(size=(C, 1, 3, 3))
    full = conv2d(x, ConvParams(w, groups=C, pad_f=1))
    for c in range(C):
        single = conv2d(x[:, c : c + 1], ConvParams(w[c : c + 1], pad_f=1))
        assert np.array_equal(full[:, c : c + 1], single)


def test_deconv_shape_map(rng):
    x = rng.normal(size=(1, 4, 3, 65))
    w = rng.normal(size=(4, 4, 1, 5))
    out = deconv2d(x, ConvParams(w, stride=(1, 2), pad_f=2, transposed=True))
    assert out.shape == (1, 4, 3, 129)


def test_deconv_matches_scatter_oracle(rng):
    B, C_in, T, F = 1, 4, 4, 6
    groups = 2
    w = rng.normal(size=(C_in, 3, 1, 5))
    b = rng.normal(size=6)
    x = rng.normal(size=(B, C_in, T, F))
    got = deconv2d(x, ConvParams(w, b, stride=(1, 2), groups=groups, pad_f=2, transposed=True))
    want = deconv2d_loops(x, w, b, (1, 2), groups, pad_f=2)
    assert got.shape == want.shape
    assert np.max(np.abs(got - want)) < 1e-10


def test_deconv_zero_input_gives_bias():
    x = np.zeros((1, 2, 3, 4))
    w = np.ones((2, 2, 1, 5))
    b = np.array([1.5, -0.5])
    out = deconv2d(x, ConvParams(w, b, stride=(1, 2), pad_f=2, transposed=True))
    assert np.allclose(out[:, 0], 1.5) and np.allclose(out[:, 1], -0.5)


def _zero_cell(n_in, n_h):
    z = np.zeros
    return GruWeights(z((3 * n_h, n_in)), z((3 * n_h, n_h)), z(3 * n_h), z(3 * n_h))


def test_gru_zero_weights_zero_output(rng):
    x = rng.normal(size=(2, 5, 4))
    out, _ = gru_forward(x, GruParams([_zero_cell(4, 4)]))
    assert np.all(out == 0)


def test_gru_single_step_hand_value():
    # scalar cell: w_ih rows (r, z, n) = (0.5, -0.3, 0.8), w_hh = 0,
    # b_ih = (0.1, 0.2, 0.3), b_hh = (0.05, -0.1, 0.2), x = 1, h0 = 0
    # r = sigma(0.65), z = sigma(-0.2), n = tanh(1.1 + 0.2 r), h1 = (1 - z) n
    cell = GruWeights(
        np.array([[0.5], [-0.3], [0.8]]),
        np.zeros((3, 1)),
        np.array([0.1, 0.2, 0.3]),
        np.array([0.05, -0.1, 0.2]),
    )
    out, final = gru_forward(np.ones((1, 1, 1)), GruParams([cell]))
    assert abs(out[0, 0, 0] - 0.46350210725350294) < 1e-12
    assert abs(final[0][0, 0] - 0.46350210725350294) < 1e-12


def test_grouped_gru_equals_two_half_grus(rng):
    n, H = 6, 3

    def rand_cell():
        return GruWeights(
            rng.normal(size=(3 * H, H)),
            rng.normal(size=(3 * H, H)),
            rng.normal(size=3 * H),
            rng.normal(size=3 * H),
        )

    c0, c1 = rand_cell(), rand_cell()
    x = rng.normal(size=(2, 7, n))
    grouped, _ = gru_forward(x, GruParams([c0, c1]))
    half0, _ = gru_forward(x[:, :, :H], GruParams([c0]))
    half1, _ = gru_forward(x[:, :, H:], GruParams([c1]))
    assert np.max(np.abs(grouped - np.concatenate([half0, half1], axis=2))) < 1e-12


def test_bidirectional_gru_concat_order(rng):
    H = 2
    cell_f = _zero_cell(H, H)
    cell_b = GruWeights(
        rng.normal(size=(3 * H, H)),
        rng.normal(size=(3 * H, H)),
        rng.normal(size=3 * H),
        rng.normal(size=3 * H),
    )
    x = rng.normal(size=(1, 4, H))
    out, _ = gru_forward(x, GruParams([cell_f], [cell_b]))
    assert out.shape == (1, 4, 2 * H)
    assert np.all(out[:, :, :H] == 0)  # forward half from the zero cell
    rev, _ = gru_forward(x[:, ::-1], GruParams([cell_b]))
    assert np.max(np.abs(out[:, :, H:] - rev[:, ::-1])) < 1e-12


def test_batchnorm_identity(rng):
    x = rng.normal(size=(1, 3, 2, 4))
    out = batchnorm_infer(x, np.ones(3), np.zeros(3), np.zeros(3), np.ones(3), eps=0.0)
    assert np.max(np.abs(out - x)) < 1e-12


def test_batchnorm_zero_scale_constant(rng):
    x = rng.normal(size=(1, 2, 3, 4))
    out = batchnorm_infer(x, np.zeros(2), np.array([1.0, -2.0]), np.zeros(2), np.ones(2))
    assert np.allclose(out[:, 0], 1.0) and np.allclose(out[:, 1], -2.0)


def test_batchnorm_matches_scalar_loop(rng):
    x = rng.normal(size=(2, 3, 4, 5))
    scale, shift = rng.normal(size=3), rng.normal(size=3)
    mean, var = rng.normal(size=3), np.abs(rng.normal(size=3)) + 0.1
    got = batchnorm_infer(x, scale, shift, mean, var, eps=1e-5)
    want = batchnorm_loops(x, scale, shift, mean, var, eps=1e-5)
    assert np.max(np.abs(got - want)) < 1e-12


def test_activations(rng):
    x = np.abs(rng.normal(size=(1, 2, 3, 4)))
    assert np.array_equal(prelu(x, np.array([0.1, 0.2])), x)
    neg = -x
    assert np.allclose(prelu(neg, np.array([0.5, 0.25]))[:, 0], 0.5 * neg[:, 0])
    assert sigmoid(np.zeros(1))[0] == 0.5
    const = np.full((1, 2, 3, 4), 3.3)
    assert np.allclose(avgpool_freq(const), 3.3)


def test_conv1d_causal_bit_exact(rng):
    x = rng.normal(size=(1, 3, 8))
    w = rng.normal(size=(2, 3, 3))
    ref = conv1d_causal(x, w)
    x2 = x.copy()
    x2[:, :, 6:] += 1.0
    assert np.array_equal(ref[:, :, :6], conv1d_causal(x2, w)[:, :, :6])
