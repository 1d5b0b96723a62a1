"""Sample container and CSV round-trip checks."""

import numpy as np
import pytest

from chowforge import ConfigError, LabeledSampleSet
from chowforge.samples import load_meta, save_meta


def make_set(N=50, n=3, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, n))
    y = rng.choice([-1, 1], size=N)
    bad = rng.random(N) < 0.2
    return LabeledSampleSet(X, y, bad)


def test_validation():
    with pytest.raises(ConfigError):
        LabeledSampleSet(np.zeros((4, 2)), np.array([1, 1, 0, -1]))
    with pytest.raises(ConfigError):
        LabeledSampleSet(np.zeros((4, 2)), np.ones(3))


def test_csv_roundtrip_exact(tmp_path):
    s = make_set()
    path = tmp_path / "s.csv"
    s.save_csv(path)
    t = LabeledSampleSet.load_csv(path)
    np.testing.assert_array_equal(s.X, t.X)  # shortest round-trip decimals
    np.testing.assert_array_equal(s.y, t.y)
    np.testing.assert_array_equal(s.corrupted, t.corrupted)


def test_csv_header_and_newlines(tmp_path):
    s = make_set(N=3, n=2)
    path = tmp_path / "s.csv"
    s.save_csv(path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode("utf-8").splitlines()[0] == "x_1,x_2,y,corrupted"


def test_subset():
    s = make_set()
    t = s.subset(np.arange(10))
    assert len(t) == 10 and t.n == s.n


def test_meta_roundtrip(tmp_path):
    path = tmp_path / "meta.json"
    save_meta(path, n=5, d=2, K=2, eta=0.05, strategy="chow_shift", seed=3, N=100)
    meta = load_meta(path)
    assert meta == {
        "n": 5, "d": 2, "K": 2, "eta": 0.05,
        "strategy": "chow_shift", "seed": 3, "N": 100,
    }
