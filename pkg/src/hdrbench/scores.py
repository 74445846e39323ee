"""Scene x method x metric score storage with explicit missing cells and CSV round trips."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ScoreTable:
    scenes: list = field(default_factory=list)
    methods: list = field(default_factory=list)
    metrics: list = field(default_factory=list)

    def __post_init__(self):
        for name, labels in (("scenes", self.scenes), ("methods", self.methods), ("metrics", self.metrics)):
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate {name} labels")
        self.scenes, self.methods, self.metrics = list(self.scenes), list(self.methods), list(self.metrics)
        shape = (len(self.scenes), len(self.methods), len(self.metrics))
        self._values = np.zeros(shape)
        self._present = np.zeros(shape, dtype=bool)

    @property
    def shape(self):
        return self._values.shape

    def _grow(self, scene, method, metric):
        for labels, axis, key in ((self.scenes, 0, scene), (self.methods, 1, method), (self.metrics, 2, metric)):
            if key not in labels:
                labels.append(key)
                pad = [(0, 0)] * 3
                pad[axis] = (0, 1)
                self._values = np.pad(self._values, pad)
                self._present = np.pad(self._present, pad)

    def set(self, scene: str, method: str, metric: str, value: float) -> None:
        value = float(value)
        if math.isnan(value):
            raise ValueError("NaN scores are not stored; leave the cell missing instead")
        self._grow(scene, method, metric)
        idx = (self.scenes.index(scene), self.methods.index(method), self.metrics.index(metric))
        self._values[idx] = value
        self._present[idx] = True

    def get(self, scene: str, method: str, metric: str):
        idx = (self.scenes.index(scene), self.methods.index(method), self.metrics.index(metric))
        return float(self._values[idx]) if self._present[idx] else None

    def has(self, scene, method, metric) -> bool:
        try:
            return self.get(scene, method, metric) is not None
        except ValueError:
            return False

    def column(self, method: str, metric: str) -> tuple[list, np.ndarray]:
        """(scenes, values) of the present cells for one method and metric."""
        j, k = self.methods.index(method), self.metrics.index(metric)
        mask = self._present[:, j, k]
        return [s for s, m in zip(self.scenes, mask) if m], self._values[mask, j, k].copy()

    def paired(self, method_a: str, method_b: str, metric: str) -> tuple[np.ndarray, np.ndarray]:
        """Scores of two methods restricted to scenes where both are present."""
        j1, j2, k = self.methods.index(method_a), self.methods.index(method_b), self.metrics.index(metric)
        mask = self._present[:, j1, k] & self._present[:, j2, k]
        return self._values[mask, j1, k].copy(), self._values[mask, j2, k].copy()

    def complete_scenes(self, metric: str) -> list:
        k = self.metrics.index(metric)
        mask = self._present[:, :, k].all(axis=1)
        return [s for s, m in zip(self.scenes, mask) if m]

    def restrict_to_complete(self, metric: str) -> "ScoreTable":
        """Copy holding only the scenes scored for every method under ``metric``."""
        keep = self.complete_scenes(metric)
        out = ScoreTable(keep, list(self.methods), [metric])
        for s in keep:
            for m in self.methods:
                out.set(s, m, metric, self.get(s, m, metric))
        return out

    def n_missing(self, metric: str) -> int:
        k = self.metrics.index(metric)
        return int((~self._present[:, :, k]).sum())

    def merge(self, other: "ScoreTable") -> None:
        for s in other.scenes:
            for m in other.methods:
                for k in other.metrics:
                    v = other.get(s, m, k)
                    if v is not None:
                        self.set(s, m, k, v)

    def to_csv(self, path, metric: str) -> None:
        """Write scene,method,value rows for every cell; missing cells get an empty value."""
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["scene", "method", "value"])
            for s in self.scenes:
                for m in self.methods:
                    v = self.get(s, m, metric)
                    w.writerow([s, m, "" if v is None else format_score(v)])

    @classmethod
    def from_csv(cls, path, metric: str, value_column: str = "value") -> "ScoreTable":
        table = cls()
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                table._grow(row["scene"], row["method"], metric)
                raw = row[value_column].strip()
                if raw:
                    table.set(row["scene"], row["method"], metric, float(raw))
        return table


def format_score(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def ingest_qjod(path, table: ScoreTable | None = None, metric: str = "q_jod") -> ScoreTable:
    """Add externally computed HDR-VDP quality scores (CSV: scene, method, q_jod)."""
    from .metrics import read_qjod_csv

    table = table if table is not None else ScoreTable()
    for scene, method, q in read_qjod_csv(path):
        table.set(scene, method, metric, q)
    return table
