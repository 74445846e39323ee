"""Camera response curves: DoRF parsing, mean-curve selection, global log-luminance CLAHE,
forward application and numeric inversion.

Every curve is a lookup table on a uniform irradiance grid over [0, 1].
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field

import numpy as np

from .images import luminance

GRID_SIZE = 1024
TIE_SLOPE = 1e-6


@dataclass(frozen=True, eq=False)
class Crf:
    name: str
    samples: np.ndarray
    # True when the monotone projection had to modify the input samples
    projected: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("a CRF needs at least two samples")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.samples.size)

    def __call__(self, values):
        return apply_crf(values, self)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["irradiance", "brightness"])
            for u, g in zip(self.grid, self.samples):
                w.writerow([f"{u:.9g}", f"{g:.9g}"])


@dataclass(frozen=True)
class CrfDatabase:
    curves: tuple = field(default_factory=tuple)

    def __post_init__(self):
        curves = tuple(self.curves)
        if not curves:
            raise ValueError("CRF database is empty")
        if len({c.samples.size for c in curves}) != 1:
            raise ValueError("all curves in a database must share the grid length")
        object.__setattr__(self, "curves", curves)

    def __len__(self):
        return len(self.curves)

    def __getitem__(self, i):
        return self.curves[i]

    def __iter__(self):
        return iter(self.curves)


def identity_crf(n: int = GRID_SIZE) -> Crf:
    return Crf("identity", np.linspace(0.0, 1.0, n))


def monotone_projection(samples) -> tuple[np.ndarray, bool]:
    """Cumulative max, then rescale so the curve runs from 0 to 1."""
    s = np.asarray(samples, dtype=np.float64)
    mono = np.maximum.accumulate(s)
    changed = bool(np.any(mono != s))
    lo, hi = mono[0], mono[-1]
    if hi <= lo:
        raise ValueError("curve has zero total variation")
    out = (mono - lo) / (hi - lo)
    changed = changed or lo != 0.0 or hi != 1.0
    out[0], out[-1] = 0.0, 1.0
    return out, changed


def make_crf(name: str, samples, grid_size: int | None = None, irradiance=None) -> Crf:
    """Build a normalized, monotone Crf; optionally resample from (irradiance, samples) pairs."""
    s = np.asarray(samples, dtype=np.float64)
    if irradiance is not None or grid_size is not None:
        n = grid_size or s.size
        u = np.linspace(0.0, 1.0, s.size) if irradiance is None else np.asarray(irradiance, float)
        order = np.argsort(u, kind="stable")
        s = np.interp(np.linspace(0.0, 1.0, n), u[order], s[order])
    proj, changed = monotone_projection(s)
    return Crf(name, proj, projected=changed)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_NUM_RE = re.compile(_NUM)
_NUMERIC_LINE = re.compile(rf"^\s*{_NUM}(?:\s+{_NUM})*\s*$")


def parse_dorf(text: str, grid_size: int = GRID_SIZE, slack: float = 1e-6) -> CrfDatabase:
    """Parse DoRF-style curve text by scanning for ``I =`` / ``B =`` markers.

    A record's name is the first non-numeric, non-marker line after the end of the
    previous record.
    """
    lines = text.splitlines()
    curves = []
    name = None
    i = 0
    state = "seek"
    irr = bri = None
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw.startswith("I ="):
            vals, i = _collect(raw[3:], lines, i)
            irr, state = vals, "have_i"
            continue
        if raw.startswith("B ="):
            if state != "have_i":
                raise ValueError(f"line {i}: 'B =' without preceding 'I ='")
            bri, i = _collect(raw[3:], lines, i)
            curves.append(_make_record(name or f"curve_{len(curves)}", irr, bri, grid_size, slack))
            name, state, irr, bri = None, "seek", None, None
            continue
        if name is None and not _NUMERIC_LINE.match(raw):
            name = raw
    if state == "have_i":
        raise ValueError("record with 'I =' but no 'B ='")
    if not curves:
        raise ValueError("no CRF records found")
    return CrfDatabase(tuple(curves))


def _collect(rest: str, lines, i):
    vals = [float(t) for t in _NUM_RE.findall(rest)]
    while i < len(lines) and _NUMERIC_LINE.match(lines[i]):
        vals.extend(float(t) for t in _NUM_RE.findall(lines[i]))
        i += 1
    return np.array(vals), i


def _make_record(name, irr, bri, grid_size, slack):
    if irr.size != bri.size:
        raise ValueError(f"{name}: I has {irr.size} samples but B has {bri.size}")
    if irr.size < 2:
        raise ValueError(f"{name}: too few samples")
    for label, arr in (("I", irr), ("B", bri)):
        if arr.min() < -slack or arr.max() > 1 + slack:
            raise ValueError(f"{name}: {label} values outside [0, 1]")
    return make_crf(name, np.clip(bri, 0, 1), grid_size=grid_size, irradiance=np.clip(irr, 0, 1))


def load_dorf(path, grid_size: int = GRID_SIZE) -> CrfDatabase:
    with open(path) as f:
        return parse_dorf(f.read(), grid_size=grid_size)


def mean_crf(db: CrfDatabase) -> Crf:
    """The database member closest (in summed squared error) to the pointwise mean curve."""
    stack = np.stack([c.samples for c in db])
    mean = stack.mean(axis=0)
    dist = ((stack - mean) ** 2).sum(axis=1)
    return db[int(np.argmin(dist))]


def clahe_crf(exposed, clip_limit: float = 4.0, bins: int = 256, log_floor: float = 1e-4,
              grid_size: int = GRID_SIZE, name: str = "clahe") -> Crf:
    """Global contrast-limited histogram equalization of log10 luminance, as a tone curve.

    ``exposed`` is the clipped linear capture min(1, e*H). Excess counts above
    ``clip_limit`` times the uniform bin count are spread evenly over all bins.
    """
    if clip_limit <= 1:
        raise ValueError("clip_limit must exceed 1")
    y = np.clip(luminance(exposed), 0.0, 1.0).ravel()
    lo = np.log10(log_floor)
    logy = np.log10(np.maximum(y, log_floor))
    if logy.max() - logy.min() <= 0:
        raise ValueError("degenerate luminance range")
    hist, edges = np.histogram(logy, bins=bins, range=(lo, 0.0))
    hist = hist.astype(np.float64)
    if np.isfinite(clip_limit):
        hist = _clip_redistribute(hist, clip_limit * hist.sum() / bins)
    cdf = np.concatenate([[0.0], np.cumsum(hist)])
    cdf /= cdf[-1]

    u = np.linspace(0.0, 1.0, grid_size)
    g = np.interp(np.log10(np.maximum(u, log_floor)), edges, cdf)
    g[u < log_floor] = 0.0
    g[0], g[-1] = 0.0, 1.0
    g = np.maximum.accumulate(g)
    return Crf(name, g)


def _clip_redistribute(hist: np.ndarray, limit: float) -> np.ndarray:
    """Clip at ``limit`` and hand the excess out evenly, re-clipping until nothing exceeds it.

    The fixed point is min(h + r, limit) with r chosen so the total count is preserved.
    """
    total = hist.sum()
    if hist.max() <= limit:
        return hist
    desc = np.sort(hist)[::-1]
    rest = total - np.cumsum(desc)  # mass of the bins below the top k+1
    n = hist.size
    for k in range(1, n):
        # top k bins pinned at the limit, the others raised by r
        r = (total - k * limit - rest[k - 1]) / (n - k)
        if desc[k - 1] + r >= limit and desc[k] + r <= limit:
            return np.minimum(hist + r, limit)
    return np.full_like(hist, total / n)


def apply_crf(values, crf: Crf) -> np.ndarray:
    """Piecewise-linear table lookup, elementwise (so per channel for RGB arrays)."""
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    n = crf.samples.size
    x = v * (n - 1)
    i0 = np.minimum(np.floor(x).astype(np.int64), n - 2)
    t = x - i0
    s = crf.samples
    return s[i0] * (1.0 - t) + s[i0 + 1] * t


def invert_crf(crf: Crf) -> Crf:
    """Numeric inverse resampled on the same uniform grid.

    Flat runs are broken with a tiny linear slope so the inverse is single valued.
    """
    s = crf.samples
    n = s.size
    if s[-1] - s[0] <= 0:
        raise ValueError("curve has zero total variation")
    u = np.linspace(0.0, 1.0, n)
    strict = np.maximum.accumulate(s) + TIE_SLOPE * u
    strict = (strict - strict[0]) / (strict[-1] - strict[0])
    inv = np.interp(u, strict, u)
    inv[0], inv[-1] = 0.0, 1.0
    return Crf(f"{crf.name}^-1", inv)


def synthetic_dorf_text(n_curves: int = 201, n_samples: int = GRID_SIZE, seed: int = 0) -> str:
    """DoRF-layout text with a family of smooth camera-like response curves.

    Curves combine a gamma segment with a filmic shoulder,
    g(u) = (1 + b) u^(1/gamma) / (1 + b u^(1/gamma)), over a spread of gamma and b.
    """
    rng = np.random.default_rng(seed)
    u = np.linspace(0.0, 1.0, n_samples)
    out = []
    for k in range(n_curves):
        gamma = rng.uniform(1.3, 3.2)
        b = rng.uniform(0.0, 2.5)
        p = u ** (1.0 / gamma)
        g = (1 + b) * p / (1 + b * p)
        out.append(f"synthetic_{k:03d}\ngraph\nI =\n")
        out.append(_format_row(u))
        out.append("B =\n")
        out.append(_format_row(g))
    return "".join(out)


def _format_row(values) -> str:
    lines = []
    for start in range(0, len(values), 8):
        lines.append("   ".join(f"{v:.6e}" for v in values[start:start + 8]))
    return "\n".join(lines) + "\n"
