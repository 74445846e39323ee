"""Controlled distortions of an HDR image, used to probe how metrics rank error types."""

from __future__ import annotations

import numpy as np

from .camsim import NoiseParams, add_noise, select_exposure
from .images import HdrImage, luminance, percentile


def camera_noise_copy(h: HdrImage, noise: NoiseParams = NoiseParams(), seed: int = 0,
                      clip_fraction: float = 0.05) -> HdrImage:
    """Add sensor noise at the exposure a camera would pick, without clipping or a tone curve.

    The result is returned in the input's units.
    """
    e = select_exposure(h, clip_fraction)
    return HdrImage(add_noise(e * h.pixels, noise, seed) / e)


def highlight_stretch(h: HdrImage, factor: float = 1.5, pct: float = 95.0) -> HdrImage:
    """Contrast-stretch luminance above its ``pct`` percentile by ``factor``, keeping chromaticity."""
    y = luminance(h)
    knee = percentile(y, pct)
    target = np.where(y > knee, knee + factor * (y - knee), y)
    ratio = np.divide(target, y, out=np.ones_like(y), where=y > 0)
    return HdrImage(h.pixels * ratio[..., None])
