"""Analytic reference reconstructions: P-lin, P-rec and naive, plus the saturation mask."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .camsim import NoiseParams, SimulationMeta, add_noise, quantize
from .images import HdrImage, LdrImage

SATURATION_KNEE = 0.9


@dataclass(frozen=True, eq=False)
class Reconstruction:
    image: HdrImage
    method_id: str
    meta: Optional[SimulationMeta] = None


def saturation_mask(l: LdrImage) -> np.ndarray:
    """alpha = max(0, L - 0.9) / 0.1 per channel, reduced over channels by max. Shape (H, W)."""
    alpha = np.maximum(0.0, l.pixels - SATURATION_KNEE) / (1.0 - SATURATION_KNEE)
    return np.clip(alpha.max(axis=2), 0.0, 1.0)


def baseline_plin(h: HdrImage, e: float, noise: NoiseParams, bits: int, seed: int,
                  meta: SimulationMeta | None = None) -> Reconstruction:
    """Perfect linearization, no recovery: the simulated capture without a tone curve.

    Runs the same forward model as ``simulate`` with the identity curve, which is what makes
    the two bit-identical. ``e`` must be the exposure chosen by the matching simulation.
    """
    exposed = e * h.pixels
    out = quantize(np.minimum(add_noise(exposed, noise, seed), 1.0), bits)
    return Reconstruction(HdrImage(out), "plin", meta)


def baseline_prec(h: HdrImage, l: LdrImage, e: float,
                  meta: SimulationMeta | None = None) -> Reconstruction:
    """Blend the exposure-scaled ground truth into saturated regions, L^2 elsewhere."""
    if (h.height, h.width) != (l.height, l.width):
        raise ValueError(f"dimension mismatch: HDR {h.width}x{h.height} vs LDR {l.width}x{l.height}")
    alpha = saturation_mask(l)[..., None]
    out = alpha * (e * h.pixels) + (1.0 - alpha) * l.pixels**2
    return Reconstruction(HdrImage(out), "prec", meta)


def baseline_naive(l: LdrImage, meta: SimulationMeta | None = None) -> Reconstruction:
    return Reconstruction(HdrImage(l.pixels**2), "naive", meta)


BASELINES = ("plin", "prec", "naive")


def make_baseline(method: str, h: HdrImage, l: LdrImage, meta: SimulationMeta) -> Reconstruction:
    if method == "plin":
        return baseline_plin(h, meta.exposure_e, meta.noise, meta.bit_depth, meta.seed, meta)
    if method == "prec":
        return baseline_prec(h, l, meta.exposure_e, meta)
    if method == "naive":
        return baseline_naive(l, meta)
    raise ValueError(f"unknown baseline {method!r}")
