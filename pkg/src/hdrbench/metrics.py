"""HDR quality metrics on absolute luminance.

Images are anchored to a display (a chosen luminance percentile is mapped to a target
cd/m^2), encoded with PU21, and then compared with PSNR or SSIM. Linear-domain PSNR is
kept as the cautionary baseline.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .images import HdrImage, luminance, percentile, write_pfm

PU_FLOOR = 0.005
PU_CEIL = 10000.0

# Published PU21 fits, keyed by variant name.
PU21_COEFFICIENTS = {
    "banding": (1.070275272, 0.4088273932, 0.153224308, 0.2520326168,
                1.063512885, 1.14115047, 521.4527484),
    "banding_glare": (0.353487901, 0.3734658629, 8.277049286e-05, 0.9062562627,
                      0.09150303166, 0.9099517204, 596.3148142),
    "peaks": (1.043882782, 0.6459495343, 0.3194584211, 0.374025247,
              1.114783422, 1.095360363, 384.9217577),
    "peaks_glare": (816.885024, 1479.463946, 0.001253215609, 0.9329636822,
                    0.06746643971, 1.573435413, 419.6006374),
}


@dataclass(frozen=True)
class PuEncoding:
    coefficients: tuple = PU21_COEFFICIENTS["banding_glare"]
    valid_luminance_range: tuple = (PU_FLOOR, PU_CEIL)
    # values above the valid range are extrapolated by the same fit unless this is set
    clamp_max: bool = False

    @classmethod
    def variant(cls, name: str) -> "PuEncoding":
        return cls(PU21_COEFFICIENTS[name])

    def encode(self, y):
        p1, p2, p3, p4, p5, p6, p7 = self.coefficients
        lo, hi = self.valid_luminance_range
        y = np.maximum(np.asarray(y, dtype=np.float64), lo)
        if self.clamp_max:
            y = np.minimum(y, hi)
        yp = y**p4
        return p7 * (((p1 + p2 * yp) / (1 + p3 * yp)) ** p5 - p6)


PU21 = PuEncoding()


@dataclass(frozen=True)
class DisplayModel:
    target_anchor_luminance: float = 500.0
    anchor_percentile: float = 95.0
    diagonal: float = 24.0
    resolution: tuple = (1920, 1200)
    viewing_distance: float = 0.5

    def __post_init__(self):
        if not 0 < self.anchor_percentile < 100:
            raise ValueError("anchor_percentile must be in (0, 100)")
        if min(self.target_anchor_luminance, self.diagonal, self.viewing_distance) <= 0:
            raise ValueError("display parameters must be positive")
        if min(self.resolution) < 1:
            raise ValueError("display resolution must be positive")

    def with_percentile(self, p: float) -> "DisplayModel":
        return DisplayModel(self.target_anchor_luminance, p, self.diagonal,
                            tuple(self.resolution), self.viewing_distance)


def _px(image) -> np.ndarray:
    return image.pixels if isinstance(image, HdrImage) else np.asarray(image, dtype=np.float64)


def anchor_scale(image, display: DisplayModel) -> float:
    ref = percentile(luminance(_px(image)), display.anchor_percentile)
    if ref <= 0:
        raise ValueError("anchor percentile luminance is zero")
    return display.target_anchor_luminance / ref


def anchor_to_display(image: HdrImage, display: DisplayModel, mode: str = "independent",
                      reference: HdrImage | None = None) -> HdrImage:
    """Scale relative values to cd/m^2.

    ``independent`` anchors the image by its own percentile; ``shared`` reuses the scale
    computed from ``reference``.
    """
    if mode == "independent":
        s = anchor_scale(image, display)
    elif mode == "shared":
        if reference is None:
            raise ValueError("shared anchoring needs a reference image")
        s = anchor_scale(reference, display)
    else:
        raise ValueError(f"unknown anchoring mode {mode!r}")
    if isinstance(image, HdrImage):
        return image.scaled(s)
    return HdrImage(_px(image) * s)


def pu21_encode(absolute, enc: PuEncoding = PU21) -> np.ndarray:
    return enc.encode(absolute)


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def psnr(reference, test, peak: float) -> float:
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    _check_shapes(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 20.0 * math.log10(peak) - 10.0 * math.log10(mse)


def pu_psnr(reference, test, enc: PuEncoding = PU21, peak: float | None = None,
            display: DisplayModel | None = None) -> float:
    """PSNR between PU-encoded RGB channels (MSE pooled over channels).

    The peak defaults to the PU value of the display's anchor luminance.
    """
    if peak is None:
        peak = float(enc.encode((display or DisplayModel()).target_anchor_luminance))
    return psnr(enc.encode(_px(reference)), enc.encode(_px(test)), peak)


def linear_psnr(reference, test, peak: float | None = None) -> float:
    ref = _px(reference)
    if peak is None:
        peak = float(ref.max())
    return psnr(ref, _px(test), peak)


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2
    w = np.exp(-(x**2) / (2 * sigma**2))
    return w / w.sum()


def _filter_valid(img: np.ndarray, w: np.ndarray) -> np.ndarray:
    n = w.size
    rows = sliding_window_view(img, n, axis=0) @ w
    return sliding_window_view(rows, n, axis=1) @ w


def ssim(x, y, data_range: float, k1: float = 0.01, k2: float = 0.03,
         win_size: int = 11, sigma: float = 1.5) -> float:
    """Mean SSIM over all fully contained Gaussian windows of two 2-D arrays."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_shapes(x, y)
    if min(x.shape) < win_size:
        raise ValueError(f"image too small for SSIM: {x.shape}, need >= {win_size}")
    w = gaussian_window(win_size, sigma)
    mx, my = _filter_valid(x, w), _filter_valid(y, w)
    sxx = _filter_valid(x * x, w) - mx * mx
    syy = _filter_valid(y * y, w) - my * my
    sxy = _filter_valid(x * y, w) - mx * my
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def pu_ssim(reference, test, enc: PuEncoding = PU21, peak: float | None = None,
            display: DisplayModel | None = None) -> float:
    if peak is None:
        peak = float(enc.encode((display or DisplayModel()).target_anchor_luminance))
    return ssim(enc.encode(luminance(_px(reference))), enc.encode(luminance(_px(test))), peak)


METRICS: dict[str, Callable] = {
    "pu_psnr": pu_psnr,
    "pu_ssim": pu_ssim,
    "linear_psnr": linear_psnr,
}


def get_metric(name: str) -> Callable:
    try:
        return METRICS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


def _anchor_pair(reference, test, display, mode):
    ref_a = anchor_to_display(reference, display)
    test_a = anchor_to_display(test, display, mode, reference=reference)
    return ref_a, test_a


def score(metric, reference: HdrImage, test: HdrImage, display: DisplayModel,
          mode: str = "independent") -> float:
    """Anchor both images to the display, then evaluate ``metric`` on absolute values."""
    fn = get_metric(metric) if isinstance(metric, str) else metric
    if fn is linear_psnr:
        return fn(reference, test)
    ref_a, test_a = _anchor_pair(reference, test, display, mode)
    return fn(ref_a, test_a, display=display)


def masked_score(metric, reference: HdrImage, test: HdrImage, mask, display: DisplayModel,
                 mode: str = "independent") -> float:
    """Score only saturated regions: both anchored images are premultiplied by ``mask``."""
    fn = get_metric(metric) if isinstance(metric, str) else metric
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != _px(reference).shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match image")
    if not np.any(mask > 0):
        raise ValueError("empty saturated region")
    a = mask[..., None]
    if fn is linear_psnr:
        return fn(_px(reference) * a, _px(test) * a)
    ref_a, test_a = _anchor_pair(reference, test, display, mode)
    return fn(ref_a.pixels * a, test_a.pixels * a, display=display)


def compute_ppd(display: DisplayModel) -> float:
    """Pixels per visual degree at the centre of the display."""
    w, h = display.resolution
    width_m = display.diagonal * 0.0254 * w / math.hypot(w, h)
    pixel_m = width_m / w
    deg_per_px = math.degrees(2.0 * math.atan(pixel_m / (2.0 * display.viewing_distance)))
    return 1.0 / deg_per_px


def export_vdp_pair(reference: HdrImage, test: HdrImage, display: DisplayModel, out_dir,
                    scene: str, method: str) -> dict:
    """Write ref.pfm / test.pfm (cd/m^2) and params.json under out_dir/<scene>__<method>/."""
    pair_dir = os.path.join(out_dir, f"{scene}__{method}")
    os.makedirs(pair_dir, exist_ok=True)
    paths = {
        "ref": os.path.join(pair_dir, "ref.pfm"),
        "test": os.path.join(pair_dir, "test.pfm"),
        "params": os.path.join(pair_dir, "params.json"),
    }
    write_pfm(reference, paths["ref"])
    write_pfm(test, paths["test"])
    params = {
        "ppd": compute_ppd(display),
        "anchor": display.target_anchor_luminance,
        "percentile": display.anchor_percentile,
        "scene": scene,
        "method": method,
        "display": {
            "diagonal_inches": display.diagonal,
            "resolution": list(display.resolution),
            "viewing_distance_m": display.viewing_distance,
        },
    }
    with open(paths["params"], "w") as f:
        json.dump(params, f, indent=2, sort_keys=True)
    return paths


def read_qjod_csv(path) -> list[tuple[str, str, float]]:
    """Rows of an external quality CSV with columns scene, method, q_jod."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = {"scene", "method", "q_jod"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for r in reader:
            rows.append((r["scene"], r["method"], float(r["q_jod"])))
    return rows
