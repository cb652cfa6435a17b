import math
import os
import pathlib

import numpy as np
import pytest

import sipkit

FIXTURES = pathlib.Path(os.environ.get("SIPKIT_FIXTURE_DIR", pathlib.Path(__file__).parents[2] / "tests" / "fixtures"))


def test_sip_names():
    assert len(sipkit.SIP_NAMES) == 20
    assert "fourier_slope" in sipkit.SIP_NAMES


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = np.round(rng.random((40, 50, 3)) * 255) / 255
    sipkit.save_png(img, tmp_path / "a.png")
    back = sipkit.load_image(tmp_path / "a.png")
    assert back.shape == (40, 50, 3)
    np.testing.assert_allclose(back, img, atol=1e-12)


def test_compute_sips_on_noise():
    rng = np.random.default_rng(2)
    img = rng.random((256, 256, 3))
    bank = sipkit.load_filter_bank(FIXTURES / "mini.filb")
    assert bank.weights.shape == (8, 3, 11, 11)
    values, flags = sipkit.compute_sips(img, bank, seed=5)
    assert set(values) == set(sipkit.SIP_NAMES)
    assert all(math.isfinite(v) for v in values.values())
    assert flags == []
    again, _ = sipkit.compute_sips(img, bank, seed=5)
    assert again == values


def test_tiny_image_raises():
    bank = sipkit.load_filter_bank(FIXTURES / "mini.filb")
    with pytest.raises(sipkit.Error) as info:
        sipkit.compute_sips(np.zeros((4, 4, 3)), bank)
    assert info.value.code == "ImageTooSmall"


def test_spearman_matches_ranks():
    r = sipkit.spearman([1, 2, 3, 4, 5], [5, 6, 7, 8, 7])
    assert r.rho == pytest.approx(0.8207826816681233)
    assert 0 < r.p < 1


def test_forward_select_finds_signal():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((200, 5))
    y = 2 * x[:, 3] + 0.3 * rng.standard_normal(200)
    model = sipkit.forward_select(x, y, reps=20, seed=1, names=list("abcde"))
    assert model.selected_names[0] == "d"
    assert model.r2_adjusted_cv > 0.9


def test_pca_on_fixture_layer():
    layer = sipkit.read_activations(FIXTURES / "activations" / "layer_02.actv")
    assert layer.data.shape == (24, 16)
    k = sipkit.pca_components_for(24, 16)
    model = sipkit.fit_pca(layer.data, k)
    scores = sipkit.project(model, layer.data)
    assert scores.shape == (24, k)
    np.testing.assert_allclose(model.components @ model.components.T, np.eye(k), atol=1e-10)
    np.testing.assert_allclose(scores.var(axis=0, ddof=1), model.explained_variance, rtol=1e-9)
