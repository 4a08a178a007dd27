import subprocess
import sys

import numpy as np
import pytest

from hdfnet.bundle import BundleFormatError, DigestMismatchError, load_weights, save_weights
from hdfnet.model import (
    ModelConfig,
    WeightBundle,
    WeightValidationError,
    init_random_weights,
    param_count,
)
from hdfnet.runconfig import RunConfig, format_run_config, parse_run_config
from hdfnet.spectral import Waveform
from hdfnet.wavio import WavFormatError, read_wav, write_wav
from scipy.io import wavfile

CFG = ModelConfig()


def test_float32_wav_round_trip(tmp_path, rng):
    w = Waveform(rng.uniform(-0.9, 0.9, size=3000).astype(np.float32).astype(np.float64))
    path = tmp_path / "a.wav"
    write_wav(path, w)
    back = read_wav(path)
    assert np.array_equal(back.samples, w.samples)


def test_pcm16_normalization(tmp_path):
    path = tmp_path / "p.wav"
    wavfile.write(path, 16000, np.array([32767, -32768, 0], dtype=np.int16))
    w = read_wav(path)
    assert w.samples[0] == 32767 / 32768
    assert w.samples[1] == -1.0
    assert w.samples[2] == 0.0


def test_stereo_rejected(tmp_path):
    path = tmp_path / "s.wav"
    wavfile.write(path, 16000, np.zeros((100, 2), dtype=np.int16))
    with pytest.raises(WavFormatError, match="channel"):
        read_wav(path)


def test_wrong_rate_rejected(tmp_path):
    path = tmp_path / "r.wav"
    wavfile.write(path, 8000, np.zeros(100, dtype=np.int16))
    with pytest.raises(WavFormatError, match="sample rate"):
        read_wav(path)


def test_bundle_round_trip_bit_exact(tmp_path):
    bundle = init_random_weights(CFG, np.random.default_rng(0))
    path = tmp_path / "w.hdfw"
    save_weights(bundle, path)
    back = load_weights(path, CFG)
    assert set(back.tensors) == set(bundle.tensors)
    for name in bundle.tensors:
        assert np.array_equal(back.tensors[name], bundle.tensors[name])


def test_bundle_missing_layer_named(tmp_path):
    bundle = init_random_weights(CFG, np.random.default_rng(0))
    del bundle.tensors["stage2/head/weight"]
    path = tmp_path / "w.hdfw"
    save_weights(bundle, path)
    with pytest.raises(WeightValidationError, match="missing layer: stage2/head/weight"):
        load_weights(path, CFG)


def test_bundle_digest_mismatch(tmp_path):
    bundle = init_random_weights(CFG, np.random.default_rng(0))
    path = tmp_path / "w.hdfw"
    save_weights(bundle, path)
    with pytest.raises(DigestMismatchError):
        load_weights(path, ModelConfig(stage1_channels=32))


def test_bundle_corrupted_magic(tmp_path):
    path = tmp_path / "w.hdfw"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(BundleFormatError):
        load_weights(path, CFG)


def test_run_config_round_trip():
    rc = RunConfig(model=ModelConfig(stage1_mode="CRM"), weights_path="w.hdfw")
    back = parse_run_config(format_run_config(rc))
    assert back.model == rc.model
    assert back.stft == rc.stft
    assert back.loss == rc.loss
    assert back.weights_path == "w.hdfw"


def test_run_config_unknown_key_rejected():
    with pytest.raises(ValueError, match="unknown key"):
        parse_run_config("model.bogus_field = 3\n")
    with pytest.raises(ValueError, match="unknown key"):
        parse_run_config("bogus = 3\n")


def test_run_config_defaults_match_pipeline():
    rc = parse_run_config("")
    assert rc.stft.window_len == 512 and rc.stft.hop == 256
    assert rc.model.stage1_channels == 16 and rc.model.stage2_channels == 32
    assert rc.loss.c == 0.3


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "hdfnet.cli", *args], capture_output=True, text=True
    )


@pytest.fixture(scope="module")
def zero_bundle_path(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    bundle = init_random_weights(CFG, np.random.default_rng(0))
    for name in bundle.tensors:
        if "/head/" in name:
            bundle.tensors[name] = np.zeros_like(bundle.tensors[name])
    path = tmp / "zero.hdfw"
    save_weights(bundle, path)
    return path


def test_cli_enhance_zero_weights_silence(tmp_path, zero_bundle_path, rng):
    noisy = tmp_path / "noisy.wav"
    out = tmp_path / "out.wav"
    write_wav(noisy, Waveform(rng.normal(size=8000) * 0.1))
    res = run_cli(
        "enhance", "--in", str(noisy), "--out", str(out), "--weights", str(zero_bundle_path)
    )
    assert res.returncode == 0, res.stderr
    assert "output=" in res.stdout
    y = read_wav(out)
    assert np.max(np.abs(y.samples)) < 1e-12


def test_cli_inspect(zero_bundle_path):
    res = run_cli("inspect", "--weights", str(zero_bundle_path))
    assert res.returncode == 0
    lines = dict(
        line.split("=", 1) for line in res.stdout.strip().splitlines() if "=" in line
    )
    assert int(lines["params_total"]) == param_count(CFG)
    assert 0.10e6 <= int(lines["params_total"]) <= 0.40e6
    assert "layer.stage1/head/weight" in lines


def test_cli_loss(tmp_path, rng):
    a = tmp_path / "a.wav"
    b = tmp_path / "b.wav"
    sig = rng.normal(size=8000) * 0.1
    write_wav(a, Waveform(sig))
    write_wav(b, Waveform(sig + rng.normal(size=8000) * 0.01))
    res = run_cli("loss", "--ref", str(a), "--est", str(b))
    assert res.returncode == 0
    assert "total_loss=" in res.stdout and "si_sdr_db=" in res.stdout


def test_cli_failure_is_one_line_diagnostic(tmp_path):
    res = run_cli("inspect", "--weights", str(tmp_path / "missing.hdfw"))
    assert res.returncode != 0
    assert res.stderr.strip().startswith("error:")
    assert len(res.stderr.strip().splitlines()) == 1


def test_cli_verify():
    res = run_cli("verify")
    assert res.returncode == 0, res.stdout + res.stderr
    assert "filter_oracles=pass" in res.stdout
