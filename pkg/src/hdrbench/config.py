"""Benchmark configuration: a JSON file with a fixed key set, loaded into dataclasses."""

from __future__ import annotations

import glob
import json
import os
from dataclasses import dataclass, field, fields

from .camsim import ClaheParams, NoiseParams
from .metrics import METRICS, DisplayModel

CRF_KINDS = ("mcrf", "clahe", "identity")


@dataclass(frozen=True)
class CameraSpec:
    crf: str = "mcrf"
    clip_fraction: float = 0.05

    def __post_init__(self):
        if self.crf not in CRF_KINDS:
            raise ValueError(f"camera crf must be one of {CRF_KINDS}, got {self.crf!r}")
        if not 0 < self.clip_fraction < 1:
            raise ValueError("clip_fraction must lie strictly inside (0, 1)")

    @property
    def anchor_percentile(self) -> float:
        return 100.0 * (1.0 - self.clip_fraction)


def default_cameras() -> dict:
    return {
        "mcrf_ev5": CameraSpec("mcrf", 0.05),
        "mcrf_ev10": CameraSpec("mcrf", 0.10),
        "clahe_ev5": CameraSpec("clahe", 0.05),
        "clahe_ev10": CameraSpec("clahe", 0.10),
    }


@dataclass
class BenchConfig:
    dataset_dir: str = "data"
    scenes: list = field(default_factory=lambda: ["*.hdr", "*.pfm"])
    target_size: tuple | None = (1024, 768)
    dorf_path: str | None = None
    cameras: dict = field(default_factory=default_cameras)
    noise: NoiseParams = field(default_factory=NoiseParams)
    bit_depth: int = 8
    clahe: ClaheParams = field(default_factory=ClaheParams)
    display: DisplayModel = field(default_factory=DisplayModel)
    metrics: list = field(default_factory=lambda: ["pu_psnr", "pu_ssim"])
    masked_metrics: list = field(default_factory=lambda: ["pu_psnr", "pu_ssim"])
    methods: list = field(default_factory=lambda: ["plin", "prec", "naive"])
    external_roots: list = field(default_factory=list)
    anchor_mode: str = "independent"
    p_threshold: float = 0.05
    paired_ttest: bool = False
    seed: int = 0
    workers: int = 1
    output_root: str = "out"

    def __post_init__(self):
        for m in list(self.metrics) + list(self.masked_metrics):
            if m not in METRICS:
                raise ValueError(f"unknown metric {m!r}")
        if self.anchor_mode not in ("independent", "shared"):
            raise ValueError(f"unknown anchor_mode {self.anchor_mode!r}")
        if not self.cameras:
            raise ValueError("at least one camera config is required")

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "cameras" in kw:
            kw["cameras"] = {name: CameraSpec(**spec) for name, spec in kw["cameras"].items()}
        if "noise" in kw:
            kw["noise"] = NoiseParams(**kw["noise"])
        if "clahe" in kw:
            kw["clahe"] = ClaheParams(**kw["clahe"])
        if "display" in kw:
            disp = dict(kw["display"])
            if "resolution" in disp:
                disp["resolution"] = tuple(disp["resolution"])
            kw["display"] = DisplayModel(**disp)
        if kw.get("target_size") is not None:
            kw["target_size"] = tuple(kw["target_size"])
        if isinstance(kw.get("scenes"), str):
            kw["scenes"] = [kw["scenes"]]
        # relative paths, including the defaults, are taken from the config file's directory
        kw.setdefault("dataset_dir", cls.dataset_dir)
        kw.setdefault("output_root", cls.output_root)
        for key in ("dataset_dir", "dorf_path", "output_root"):
            if kw.get(key) is not None:
                kw[key] = os.path.normpath(os.path.join(base_dir, kw[key]))
        kw["external_roots"] = [os.path.normpath(os.path.join(base_dir, p)) for p in kw.get("external_roots", [])]
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "BenchConfig":
        with open(path) as f:
            data = json.load(f)
        return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))

    def scene_paths(self) -> dict:
        """scene id -> file path, sorted by id; ids must be unique."""
        found = {}
        for pattern in self.scenes:
            for path in sorted(glob.glob(os.path.join(self.dataset_dir, pattern))):
                sid = os.path.splitext(os.path.basename(path))[0]
                if sid in found and found[sid] != path:
                    raise ValueError(f"duplicate scene id {sid!r}")
                found[sid] = path
        return dict(sorted(found.items()))

    def display_for(self, camera: str) -> DisplayModel:
        return self.display.with_percentile(self.cameras[camera].anchor_percentile)
