"""Procedural HDR test scenes.

Each scene is a smooth, log-normally distributed diffuse field with mild texture and colour
variation, plus a handful of compact light sources one to three orders of magnitude brighter.
Useful when no captured HDR dataset is at hand.
"""

from __future__ import annotations

import os

import numpy as np

from .images import HdrImage, save_hdr


def _smooth_field(rng, h, w, cutoff):
    noise = rng.standard_normal((h, w))
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    spec = np.fft.fft2(noise) * np.exp(-(fx**2 + fy**2) / (2 * cutoff**2))
    field = np.real(np.fft.ifft2(spec))
    return (field - field.mean()) / (field.std() + 1e-12)


def synthetic_scene(seed: int, width: int = 256, height: int = 192,
                    decades: float = 2.5, n_lights: int | None = None,
                    highlight_texture: float = 0.3) -> HdrImage:
    rng = np.random.default_rng(seed)
    # ``decades`` is roughly the 0.5th-99.5th percentile span of the diffuse field
    log_l = (decades / 6.0) * _smooth_field(rng, height, width, 0.02)
    texture = _smooth_field(rng, height, width, 0.15)
    log_l += 0.1 * texture
    # a soft vertical illumination gradient (sky above, ground below)
    yy = np.linspace(1.0, -1.0, height)[:, None]
    log_l += rng.uniform(0.0, 0.4) * yy
    lum = 10.0 ** log_l

    chroma = np.stack([np.exp(0.15 * _smooth_field(rng, height, width, 0.03)) for _ in range(3)], axis=2)
    chroma /= (chroma @ np.array([0.2126, 0.7152, 0.0722]))[..., None]
    img = lum[..., None] * chroma

    base = np.percentile(lum, 90)
    n_lights = int(rng.integers(2, 7)) if n_lights is None else n_lights
    ys, xs = np.mgrid[0:height, 0:width]
    for _ in range(n_lights):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        radius = rng.uniform(0.01, 0.035) * min(height, width)
        peak = base * 10.0 ** rng.uniform(1.0, 3.0)
        tint = rng.uniform(0.8, 1.2, size=3)
        blob = np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * radius**2))
        # flat-topped source with a glow falloff
        img += (peak * np.clip(1.6 * blob, 0, 1) ** 2)[..., None] * tint
    # highlights carry surface texture like the rest of the scene
    lights = img - lum[..., None] * chroma
    img = lum[..., None] * chroma + lights * 10.0 ** (highlight_texture * texture)[..., None]
    return HdrImage(img)


def write_synthetic_dataset(out_dir, n_scenes: int, width: int = 256, height: int = 192,
                            seed: int = 0, ext: str = ".pfm") -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(n_scenes):
        path = os.path.join(out_dir, f"scene_{i:03d}{ext}")
        save_hdr(synthetic_scene(seed * 100003 + i, width, height), path)
        paths.append(path)
    return paths
