"""Forward camera model: L = q(min(1, g(e*H + noise(H)))).

The pipeline is exposure selection, signal-dependent Gaussian noise, clipping, tone curve,
then quantization.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .crf import Crf, apply_crf, clahe_crf, identity_crf
from .images import HdrImage, LdrImage, percentile


@dataclass(frozen=True)
class NoiseParams:
    """Gaussian approximation of shot plus read noise: var(v) = k_signal * v + sigma_read**2.

    Units are relative to the clip point (exposed value 1.0). The defaults are placeholders,
    not calibrated sensor measurements.
    """

    k_signal: float = 4e-3
    sigma_read: float = 1e-3
    enabled: bool = True

    def __post_init__(self):
        if self.k_signal < 0 or self.sigma_read < 0:
            raise ValueError("noise parameters must be non-negative")

    @classmethod
    def off(cls) -> "NoiseParams":
        return cls(0.0, 0.0, False)


@dataclass(frozen=True)
class ClaheParams:
    clip_limit: float = 4.0
    bins: int = 256
    log_floor: float = 1e-4


# crf_mode is a static Crf, the string "clahe", or the string "identity"
CrfMode = Union[Crf, str]


@dataclass(frozen=True)
class CameraConfig:
    crf_mode: CrfMode = "identity"
    clip_fraction: float = 0.05
    noise: NoiseParams = field(default_factory=NoiseParams)
    bit_depth: int = 8
    seed: int = 0
    clahe: ClaheParams = field(default_factory=ClaheParams)

    def __post_init__(self):
        if not 0 < self.clip_fraction < 1:
            raise ValueError("clip_fraction must lie strictly inside (0, 1)")
        if not 2 <= self.bit_depth <= 16:
            raise ValueError("bit_depth must be in [2, 16]")
        if isinstance(self.crf_mode, str) and self.crf_mode not in ("clahe", "identity"):
            raise ValueError(f"unknown crf_mode {self.crf_mode!r}")

    @property
    def anchor_percentile(self) -> float:
        return 100.0 * (1.0 - self.clip_fraction)


@dataclass(frozen=True)
class SimulationMeta:
    scene_id: str
    exposure_e: float
    clip_fraction: float
    crf_used: Crf
    noise: NoiseParams
    bit_depth: int
    seed: int

    @property
    def clip_point(self) -> float:
        return 1.0 / self.exposure_e

    def to_json(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "exposure_e": self.exposure_e,
            "clip_point": self.clip_point,
            "clip_fraction": self.clip_fraction,
            "crf_name": self.crf_used.name,
            "noise": asdict(self.noise),
            "bit_depth": self.bit_depth,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, d: dict, crf: Crf | None = None) -> "SimulationMeta":
        return cls(
            scene_id=d["scene_id"],
            exposure_e=float(d["exposure_e"]),
            clip_fraction=float(d["clip_fraction"]),
            crf_used=crf if crf is not None else Crf(d["crf_name"], np.linspace(0, 1, 2)),
            noise=NoiseParams(**d["noise"]),
            bit_depth=int(d["bit_depth"]),
            seed=int(d["seed"]),
        )


def scene_seed(global_seed: int, scene_id: str) -> int:
    """Mix the global seed with a stable hash of the scene name (order independent)."""
    digest = hashlib.sha256(scene_id.encode("utf-8")).digest()
    ss = np.random.SeedSequence([int(global_seed) & (2**64 - 1), int.from_bytes(digest[:8], "little")])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def select_exposure(h: HdrImage, clip_fraction: float) -> float:
    """Exposure e such that a fraction >= clip_fraction of pixels has e * max(RGB) >= 1."""
    peak = h.pixels.max(axis=2)
    if not np.any(peak > 0):
        raise ValueError("cannot select an exposure for an all-zero image")
    ref = percentile(peak, 100.0 * (1.0 - clip_fraction))
    if ref <= 0:
        raise ValueError("clip percentile is zero; image too dark to expose")
    e = 1.0 / ref
    # 1/ref can round so that ref * e < 1, which would leave the percentile pixel unclipped
    while e * ref < 1.0:
        e = float(np.nextafter(e, np.inf))
    return e


def add_noise(exposed, params: NoiseParams, rng_seed: int) -> np.ndarray:
    v = np.asarray(exposed, dtype=np.float64)
    if not params.enabled or (params.k_signal == 0 and params.sigma_read == 0):
        return v.copy()
    rng = np.random.default_rng(rng_seed)
    sigma = np.sqrt(params.k_signal * np.maximum(v, 0.0) + params.sigma_read**2)
    return np.maximum(v + sigma * rng.standard_normal(v.shape), 0.0)


def quantize(values, bits: int) -> np.ndarray:
    levels = 2**bits - 1
    # floor(x + 0.5) rounds halves up, unlike numpy's banker's rounding
    return np.floor(np.clip(values, 0.0, 1.0) * levels + 0.5) / levels


def resolve_crf(cfg: CameraConfig, clipped_noiseless: np.ndarray) -> Crf:
    if isinstance(cfg.crf_mode, Crf):
        return cfg.crf_mode
    if cfg.crf_mode == "identity":
        return identity_crf()
    p = cfg.clahe
    return clahe_crf(clipped_noiseless, clip_limit=p.clip_limit, bins=p.bins, log_floor=p.log_floor)


def simulate(h: HdrImage, cfg: CameraConfig, scene_id: str = "scene") -> tuple[LdrImage, SimulationMeta]:
    e = select_exposure(h, cfg.clip_fraction)
    exposed = e * h.pixels
    noisy = add_noise(exposed, cfg.noise, cfg.seed)
    clipped = np.minimum(noisy, 1.0)
    crf = resolve_crf(cfg, np.minimum(exposed, 1.0))
    # the identity mode skips the table lookup so it stays bit-exact
    toned = clipped if cfg.crf_mode == "identity" else apply_crf(clipped, crf)
    ldr = LdrImage(quantize(toned, cfg.bit_depth), cfg.bit_depth)
    meta = SimulationMeta(scene_id, e, cfg.clip_fraction, crf, cfg.noise, cfg.bit_depth, cfg.seed)
    return ldr, meta
