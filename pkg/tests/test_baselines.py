import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdrbench.baselines import (baseline_naive, baseline_plin, baseline_prec, make_baseline,
                                saturation_mask)
from hdrbench.camsim import CameraConfig, NoiseParams, simulate
from hdrbench.crf import make_crf
from hdrbench.images import HdrImage, LdrImage
from hdrbench.scenes import synthetic_scene


def ldr(values, bits=8):
    return LdrImage.from_values(np.asarray(values, dtype=np.float64), bits)


def test_saturation_mask_examples():
    levels = 2**16 - 1
    px = np.array([[[0.9, 0.9, 0.9], [1.0, 0.2, 0.2], [0.95, 0.5, 0.5]]])
    px = np.round(px * levels) / levels
    alpha = saturation_mask(LdrImage(px, 16))
    assert alpha.shape == (1, 3)
    assert alpha[0, 0] == pytest.approx(0.0, abs=1e-4)
    assert alpha[0, 1] == 1.0
    assert alpha[0, 2] == pytest.approx(0.5, abs=1e-4)


@given(st.integers(0, 2**32 - 1))
def test_saturation_mask_in_unit_range(seed):
    l = ldr(np.random.default_rng(seed).uniform(0, 1, (5, 6, 3)))
    a = saturation_mask(l)
    assert a.shape == (5, 6)
    assert a.min() >= 0 and a.max() <= 1


def test_plin_constant_half():
    h = HdrImage(np.full((4, 4, 3), 0.5))
    rec = baseline_plin(h, 1.0, NoiseParams.off(), 8, 0)
    assert np.all(rec.image.pixels == 128 / 255)
    assert rec.method_id == "plin"


def test_plin_clips():
    h = HdrImage(np.array([[[2.0, 1.0, 0.3]]]))
    rec = baseline_plin(h, 1.0, NoiseParams.off(), 8, 0)
    assert rec.image.pixels[0, 0, 0] == 1.0 and rec.image.pixels[0, 0, 1] == 1.0


@pytest.mark.parametrize("noise", [NoiseParams.off(), NoiseParams()])
@pytest.mark.parametrize("bits", [8, 16])
def test_plin_equals_identity_simulation(noise, bits):
    h = synthetic_scene(11, 64, 48)
    l, meta = simulate(h, CameraConfig("identity", 0.05, noise, bits, seed=1234))
    rec = make_baseline("plin", h, l, meta)
    assert np.array_equal(rec.image.pixels, l.pixels)


def test_prec_blend_endpoints_and_midpoint():
    h = HdrImage(np.array([[[0.1, 0.1, 0.1], [8.0, 8.0, 8.0], [4.0, 4.0, 4.0]]]))
    levels = 2**16 - 1
    l = LdrImage(np.round(np.array([[[0.5, 0.5, 0.5], [1.0, 1.0, 1.0], [0.95, 0.95, 0.95]]]) * levels) / levels, 16)
    e = 1.0
    rec = baseline_prec(h, l, e).image.pixels
    assert np.all(rec[0, 0] == l.pixels[0, 0] ** 2)
    assert np.all(rec[0, 1] == 8.0)
    a = (l.pixels[0, 2, 0] - 0.9) / 0.1
    assert rec[0, 2, 0] == pytest.approx(a * 4.0 + (1 - a) * l.pixels[0, 2, 0] ** 2)


def test_prec_half_alpha_blend():
    # alpha = 0.5 from the red channel; every channel blends eH = 4 with its own L^2
    levels = 2**16 - 1
    l = LdrImage(np.round(np.array([[[0.95, 0.5, 0.5]]]) * levels) / levels, 16)
    rec = baseline_prec(HdrImage(np.full((1, 1, 3), 2.0)), l, 2.0).image.pixels[0, 0]
    a = saturation_mask(l)[0, 0]
    assert a == pytest.approx(0.5, abs=1e-4)
    assert rec == pytest.approx(a * 4.0 + (1 - a) * l.pixels[0, 0] ** 2, rel=1e-15)


def test_prec_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        baseline_prec(HdrImage(np.ones((2, 3, 3))), ldr(np.ones((3, 2, 3))), 1.0)


def test_naive_squares():
    l = ldr(np.array([[[0.0, 128 / 255, 1.0]]]))
    out = baseline_naive(l).image.pixels
    assert out[0, 0, 0] == 0 and out[0, 0, 2] == 1
    assert out[0, 0, 1] == pytest.approx((128 / 255) ** 2)


def test_naive_half_is_quarter():
    assert baseline_naive(ldr(np.full((1, 1, 3), 0.5), 16)).image.pixels[0, 0, 0] == pytest.approx(0.25, abs=1e-4)


@settings(max_examples=30)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_naive_is_monotone(ab):
    a, b = sorted(ab)
    pa = baseline_naive(ldr(np.full((1, 1, 3), a), 16)).image.pixels[0, 0, 0]
    pb = baseline_naive(ldr(np.full((1, 1, 3), b), 16)).image.pixels[0, 0, 0]
    assert pa <= pb


def test_prec_at_full_saturation_equals_scaled_truth():
    h = synthetic_scene(12, 64, 48)
    crf = make_crf("g", np.linspace(0, 1, 256) ** 0.45)
    l, meta = simulate(h, CameraConfig(crf, 0.05, NoiseParams.off(), 8))
    rec = make_baseline("prec", h, l, meta).image.pixels
    full = saturation_mask(l) == 1.0
    assert full.any()
    assert np.array_equal(rec[full], meta.exposure_e * h.pixels[full])


def test_make_baseline_unknown():
    h = synthetic_scene(1, 16, 16)
    l, meta = simulate(h, CameraConfig("identity"))
    with pytest.raises(ValueError):
        make_baseline("oracle", h, l, meta)
