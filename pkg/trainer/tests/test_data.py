import numpy as np

from hdftrain.data import SEGMENT_SAMPLES, SNR_CHOICES_DB, SyntheticDataset


def test_items_are_deterministic():
    ds = SyntheticDataset(4, seed=3)
    a, b = ds[2], ds[2]
    assert np.array_equal(a.clean, b.clean)
    assert np.array_equal(a.noise, b.noise)
    assert a.snr_db == b.snr_db


def test_segment_length_is_two_seconds():
    u = SyntheticDataset(1, seed=0)[0]
    assert len(u.clean) == len(u.noise) == SEGMENT_SAMPLES == 32000


def test_mixture_identity_and_exact_snr():
    ds = SyntheticDataset(16, seed=7)
    for i in range(len(ds)):
        u = ds[i]
        assert np.array_equal(u.noisy, u.clean + u.noise)
        assert u.snr_db in SNR_CHOICES_DB
        realized = 20.0 * np.log10(
            np.sqrt(np.mean(u.clean**2)) / np.sqrt(np.mean(u.noise**2))
        )
        assert abs(realized - u.snr_db) < 0.1


def test_clean_only_has_zero_noise():
    u = SyntheticDataset(1, seed=0, clean_only=True)[0]
    assert np.all(u.noise == 0.0)
    assert np.array_equal(u.noisy, u.clean)


def test_different_indices_differ():
    ds = SyntheticDataset(2, seed=0)
    assert not np.array_equal(ds[0].clean, ds[1].clean)
