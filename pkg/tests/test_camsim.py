import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdrbench.camsim import (CameraConfig, NoiseParams, SimulationMeta, add_noise, quantize, scene_seed,
                             select_exposure, simulate)
from hdrbench.crf import make_crf, mean_crf, parse_dorf, synthetic_dorf_text
from hdrbench.images import HdrImage
from hdrbench.scenes import synthetic_scene

NOISE_OFF = NoiseParams.off()


def gray(values, shape=None):
    v = np.asarray(values, dtype=np.float64)
    if shape is not None:
        v = v.reshape(shape)
    return HdrImage(np.repeat(v[..., None], 3, axis=-1))


# --- exposure -------------------------------------------------------------

def test_select_exposure_on_enumerated_values():
    img = gray(np.random.default_rng(0).permutation(0.01 * np.arange(1, 101)), (10, 10))
    assert select_exposure(img, 0.05) == pytest.approx(1 / 0.95)


def test_select_exposure_constant_image():
    assert select_exposure(gray(np.full((4, 4), 0.37)), 0.1) == pytest.approx(1 / 0.37)


def test_select_exposure_scale_equivariance():
    img = synthetic_scene(1, 64, 48)
    assert select_exposure(img.scaled(2.0), 0.05) == pytest.approx(select_exposure(img, 0.05) / 2, rel=1e-15)


def test_select_exposure_uses_channel_maximum():
    px = np.zeros((1, 20, 3))
    px[0, :, 0] = np.arange(1, 21)  # red carries the ranking
    px[0, :, 1] = 0.5
    assert select_exposure(HdrImage(px), 0.05) == pytest.approx(1 / 19)


def test_select_exposure_all_zero():
    with pytest.raises(ValueError):
        select_exposure(HdrImage(np.zeros((3, 3, 3))), 0.05)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.5))
def test_clip_count_is_minimal_under_nearest_rank(seed, f):
    rng = np.random.default_rng(seed)
    img = HdrImage(rng.lognormal(0, 2, (13, 17, 3)))
    e = select_exposure(img, f)
    raw = img.pixels.max(axis=2).ravel()
    n = raw.size
    rank = int(np.ceil(round((1 - f) * n, 9)))
    thr = np.sort(raw)[rank - 1]
    clipped = e * raw >= 1
    assert clipped.sum() >= f * n - 1e-9
    # exactly the pixels at or above the nearest-rank value clip, no more
    assert np.array_equal(clipped, raw >= thr)


# --- noise ----------------------------------------------------------------

def test_noise_off_is_identity():
    v = np.random.default_rng(1).uniform(0, 2, (8, 8, 3))
    assert np.array_equal(add_noise(v, NOISE_OFF, 5), v)
    assert np.array_equal(add_noise(v, NoiseParams(0.0, 0.0), 5), v)


def test_noise_variance_matches_model():
    v = np.full(1_200_000, 0.25)
    out = add_noise(v, NoiseParams(0.004, 0.001), 11)
    expect = 0.004 * 0.25 + 0.001**2
    assert out.var() == pytest.approx(expect, rel=0.05)
    assert out.mean() == pytest.approx(0.25, abs=1e-3)


def test_noise_is_deterministic_per_seed():
    v = np.random.default_rng(2).uniform(0, 1, (16, 16, 3))
    a = add_noise(v, NoiseParams(), 7)
    assert np.array_equal(a, add_noise(v, NoiseParams(), 7))
    assert not np.array_equal(a, add_noise(v, NoiseParams(), 8))
    assert a.min() >= 0


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(-1.0, 0.0)


# --- quantization ---------------------------------------------------------

def test_quantize_examples():
    assert quantize(0.5, 8) == pytest.approx(128 / 255)
    assert quantize(0.5, 8) == pytest.approx(0.501961, abs=1e-6)
    assert quantize(0.0, 8) == 0.0 and quantize(1.0, 8) == 1.0
    # exact half-code ties round up
    assert quantize(0.5 / 255, 8) == 1 / 255


@pytest.mark.parametrize("bits", [2, 8, 10, 16])
def test_quantize_error_bound_on_fine_grid(bits):
    v = np.linspace(0.0, 1.0, 200_001)
    err = np.abs(quantize(v, bits) - v)
    assert err.max() <= 0.5 / (2**bits - 1) + 1e-15


@given(st.floats(0, 1), st.integers(2, 16))
def test_quantize_lands_on_grid(v, bits):
    q = quantize(v, bits) * (2**bits - 1)
    assert q == np.round(q)


# --- seeds ----------------------------------------------------------------

def test_scene_seed_is_stable_and_mixes():
    assert scene_seed(0, "a") == scene_seed(0, "a")
    assert scene_seed(0, "a") != scene_seed(1, "a")
    assert scene_seed(0, "a") != scene_seed(0, "b")
    assert 0 <= scene_seed(2**63, "x") < 2**64


# --- simulate -------------------------------------------------------------

def test_simulate_identity_saturates_brightest_pixels():
    img = synthetic_scene(3, 64, 48)
    ldr, meta = simulate(img, CameraConfig("identity", 0.05, NOISE_OFF, 8))
    peak = meta.exposure_e * img.pixels.max(axis=2)
    ch = img.pixels.argmax(axis=2)
    sat = peak >= 1
    assert np.all(np.take_along_axis(ldr.pixels, ch[..., None], axis=2)[..., 0][sat] == 1.0)
    assert sat.mean() >= 0.05


def test_simulate_mcrf_matches_hand_composition():
    crf = mean_crf(parse_dorf(synthetic_dorf_text()))
    rng = np.random.default_rng(4)
    img = HdrImage(rng.uniform(0.05, 1.0, (10, 10, 3)))
    ldr, meta = simulate(img, CameraConfig(crf, 0.05, NOISE_OFF, 8))
    e = meta.exposure_e
    v = img.pixels[3, 4, 1]
    g = np.interp(min(e * v, 1.0), np.linspace(0, 1, crf.samples.size), crf.samples)
    assert ldr.pixels[3, 4, 1] == np.floor(g * 255 + 0.5) / 255
    assert meta.crf_used is crf


def test_simulate_clahe_uses_noiseless_curve():
    img = synthetic_scene(5, 64, 48)
    a, ma = simulate(img, CameraConfig("clahe", 0.05, NoiseParams(), 8, seed=1))
    b, mb = simulate(img, CameraConfig("clahe", 0.05, NoiseParams(), 8, seed=2))
    assert np.array_equal(ma.crf_used.samples, mb.crf_used.samples)
    assert not np.array_equal(a.pixels, b.pixels)


def test_simulate_is_deterministic():
    img = synthetic_scene(6, 64, 48)
    cfg = CameraConfig("clahe", 0.1, NoiseParams(), 8, seed=99)
    a, _ = simulate(img, cfg)
    b, _ = simulate(img, cfg)
    assert np.array_equal(a.pixels, b.pixels)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_ev10_saturates_at_least_as_much_as_ev5(seed):
    img = synthetic_scene(seed, 48, 32)
    crf = make_crf("g", np.linspace(0, 1, 256) ** 0.45)
    l5, _ = simulate(img, CameraConfig(crf, 0.05, NOISE_OFF, 8))
    l10, _ = simulate(img, CameraConfig(crf, 0.10, NOISE_OFF, 8))
    s5 = (l5.pixels == 1).any(axis=2).mean()
    s10 = (l10.pixels == 1).any(axis=2).mean()
    assert s5 >= 0.05 and s10 >= 0.10
    assert s10 >= s5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_noise_free_output_is_monotone_in_input(seed):
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.01, 2.0, (8, 8, 3))
    bigger = base * rng.uniform(1.0, 3.0, base.shape)
    crf = make_crf("g", np.linspace(0, 1, 256) ** 0.6)
    # fix the exposure by giving both images the same bright pixel block
    base[:2], bigger[:2] = 50.0, 50.0
    a, ma = simulate(HdrImage(base), CameraConfig(crf, 0.2, NOISE_OFF, 8))
    b, mb = simulate(HdrImage(bigger), CameraConfig(crf, 0.2, NOISE_OFF, 8))
    assert ma.exposure_e == mb.exposure_e
    assert np.all(b.pixels >= a.pixels)


def test_meta_json_round_trip(tmp_path):
    img = synthetic_scene(7, 32, 24)
    _, meta = simulate(img, CameraConfig("identity", 0.05, NoiseParams(), 10, seed=42), "s7")
    d = meta.to_json()
    assert set(d) >= {"scene_id", "exposure_e", "clip_fraction", "crf_name", "noise", "bit_depth", "seed"}
    assert d["noise"]["k_signal"] == 4e-3 and d["noise"]["sigma_read"] == 1e-3
    assert d["exposure_e"] * d["clip_point"] == pytest.approx(1.0)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(d))
    back = SimulationMeta.from_json(json.loads(path.read_text()))
    assert back.exposure_e == meta.exposure_e and back.seed == 42 and back.bit_depth == 10
    assert back.noise == meta.noise


def test_camera_config_validation():
    with pytest.raises(ValueError):
        CameraConfig("identity", 0.0)
    with pytest.raises(ValueError):
        CameraConfig("identity", 0.05, bit_depth=17)
    with pytest.raises(ValueError):
        CameraConfig("gamma")
    assert CameraConfig(clip_fraction=0.1).anchor_percentile == pytest.approx(90.0)
