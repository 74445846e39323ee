"""HDR/LDR raster types, Radiance RGBE and PFM file I/O, pixel utilities."""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass

import numpy as np

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True, eq=False)
class HdrImage:
    """Linear relative-radiance RGB raster, stored as a (height, width, 3) float64 array."""

    pixels: np.ndarray
    color_space_tag: str = "linear Rec.709 primaries"

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must contain at least one pixel")
        if not np.all(np.isfinite(px)):
            raise ValueError("HDR pixels must be finite")
        if np.any(px < 0):
            raise ValueError("HDR pixels must be non-negative")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def scaled(self, factor: float) -> "HdrImage":
        return HdrImage(self.pixels * factor, self.color_space_tag)


@dataclass(frozen=True, eq=False)
class LdrImage:
    """Display-encoded RGB raster in [0, 1], quantized to ``bit_depth`` levels."""

    pixels: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        if not 2 <= self.bit_depth <= 16:
            raise ValueError(f"bit_depth must be in [2, 16], got {self.bit_depth}")
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected non-empty (H, W, 3) pixels, got shape {px.shape}")
        levels = self.levels
        codes = px * levels
        if np.any(px < 0) or np.any(px > 1) or np.any(np.abs(codes - np.round(codes)) > 1e-6):
            raise ValueError(f"pixels are not on the {self.bit_depth}-bit grid")
        px = np.round(codes) / levels
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def levels(self) -> int:
        return 2**self.bit_depth - 1

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_values(cls, values, bit_depth: int = 8) -> "LdrImage":
        """Snap approximately quantized values (e.g. read back from float32) onto the grid."""
        levels = 2**bit_depth - 1
        values = np.asarray(values, dtype=np.float64)
        return cls(np.round(np.clip(values, 0.0, 1.0) * levels) / levels, bit_depth)


def luminance(image) -> np.ndarray:
    """Rec.709 luminance of every pixel, shape (H, W)."""
    px = image.pixels if hasattr(image, "pixels") else np.asarray(image)
    return px @ LUMA_WEIGHTS


def percentile(values, p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * N)-th smallest value (1-based)."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("percentile of empty input")
    if not 0 < p < 100:
        raise ValueError(f"percentile p must be in (0, 100), got {p}")
    # round() absorbs float noise such as 100 * (1 - 0.05) = 95.00000000000001
    rank = math.ceil(round(p * v.size / 100.0, 9))
    rank = min(max(rank, 1), v.size)
    return float(np.partition(v, rank - 1)[rank - 1])


def _bilinear_axis(n_in: int, n_out: int, scale: float):
    x = (np.arange(n_out) + 0.5) / scale - 0.5
    x = np.clip(x, 0, n_in - 1)
    i0 = np.floor(x).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, x - i0


def resize_bilinear(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w = pixels.shape[:2]
    y0, y1, fy = _bilinear_axis(h, out_h, out_h / h)
    x0, x1, fx = _bilinear_axis(w, out_w, out_w / w)
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    top = pixels[y0][:, x0] * (1 - fx) + pixels[y0][:, x1] * fx
    bot = pixels[y1][:, x0] * (1 - fx) + pixels[y1][:, x1] * fx
    return top * (1 - fy) + bot * fy


def resize_center_crop(image: HdrImage, w: int, h: int) -> HdrImage:
    """Scale so a w x h window fits inside, then crop that window from the center."""
    if w < 1 or h < 1:
        raise ValueError(f"degenerate target size {w}x{h}")
    px = image.pixels
    scale = max(w / image.width, h / image.height)
    if scale != 1.0:
        new_w = max(w, int(round(image.width * scale)))
        new_h = max(h, int(round(image.height * scale)))
        px = resize_bilinear(px, new_h, new_w)
    top = (px.shape[0] - h) // 2
    left = (px.shape[1] - w) // 2
    out = np.maximum(px[top:top + h, left:left + w], 0.0)
    return HdrImage(out, image.color_space_tag)


# --- Radiance RGBE ---------------------------------------------------------

def float_to_rgbe(pixels: np.ndarray) -> np.ndarray:
    px = np.asarray(pixels, dtype=np.float64)
    peak = px.max(axis=-1)
    mant, expo = np.frexp(peak)
    out = np.zeros(px.shape[:-1] + (4,), dtype=np.uint8)
    # below 1e-32 Radiance writes an all-zero pixel
    ok = peak > 1e-32
    scale = np.where(ok, mant * 256.0 / np.where(ok, peak, 1.0), 0.0)
    out[..., :3] = np.clip(np.floor(px * scale[..., None]), 0, 255).astype(np.uint8)
    out[..., 3] = np.where(ok, expo + 128, 0).astype(np.uint8)
    return out


def rgbe_to_float(rgbe: np.ndarray) -> np.ndarray:
    rgbe = np.asarray(rgbe)
    e = rgbe[..., 3].astype(np.int32)
    f = np.ldexp(1.0, e - 136)
    out = (rgbe[..., :3].astype(np.float64) + 0.5) * f[..., None]
    out[e == 0] = 0.0
    return out


_RES_RE = re.compile(rb"^-Y\s+(\d+)\s+\+X\s+(\d+)\s*$")


def _read_rle_scanline(buf: bytes, pos: int, width: int) -> tuple[np.ndarray, int]:
    line = np.empty((4, width), dtype=np.uint8)
    for c in range(4):
        x = 0
        while x < width:
            if pos >= len(buf):
                raise ValueError("truncated RLE scanline")
            count = buf[pos]
            pos += 1
            if count > 128:
                count -= 128
                if x + count > width:
                    raise ValueError("scanline length mismatch")
                line[c, x:x + count] = buf[pos]
                pos += 1
            else:
                if count == 0 or x + count > width:
                    raise ValueError("scanline length mismatch")
                chunk = buf[pos:pos + count]
                if len(chunk) != count:
                    raise ValueError("truncated RLE scanline")
                line[c, x:x + count] = np.frombuffer(chunk, dtype=np.uint8)
                pos += count
            x += count
    return line.T, pos


def read_hdr(path) -> HdrImage:
    with open(path, "rb") as f:
        data = f.read()
    if not (data.startswith(b"#?RADIANCE") or data.startswith(b"#?RGBE")):
        raise ValueError(f"{path}: not a Radiance HDR file")
    pos = 0
    fmt = None
    # header: lines until an empty line
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise ValueError(f"{path}: malformed header")
        line = data[pos:end].strip()
        pos = end + 1
        if not line:
            break
        if line.startswith(b"FORMAT="):
            fmt = line[len(b"FORMAT="):].decode("ascii", "replace")
    if fmt is None:
        raise ValueError(f"{path}: header has no FORMAT line")
    if fmt != "32-bit_rle_rgbe":
        raise ValueError(f"{path}: unsupported format {fmt!r}")
    end = data.find(b"\n", pos)
    if end < 0:
        raise ValueError(f"{path}: missing resolution line")
    m = _RES_RE.match(data[pos:end].strip())
    if m is None:
        raise ValueError(f"{path}: unsupported resolution line {data[pos:end]!r}")
    height, width = int(m.group(1)), int(m.group(2))
    pos = end + 1

    rgbe = np.empty((height, width, 4), dtype=np.uint8)
    for y in range(height):
        head = data[pos:pos + 4]
        if len(head) < 4:
            raise ValueError(f"{path}: truncated pixel data at row {y}")
        if 8 <= width <= 32767 and head[0] == 2 and head[1] == 2 and head[2] < 128:
            if (head[2] << 8 | head[3]) != width:
                raise ValueError(f"{path}: scanline length mismatch at row {y}")
            rgbe[y], pos = _read_rle_scanline(data, pos + 4, width)
        else:
            chunk = data[pos:pos + 4 * width]
            if len(chunk) != 4 * width:
                raise ValueError(f"{path}: scanline length mismatch at row {y}")
            flat = np.frombuffer(chunk, dtype=np.uint8).reshape(width, 4)
            if np.any((flat[:, 0] == 1) & (flat[:, 1] == 1) & (flat[:, 2] == 1)):
                raise ValueError(f"{path}: old-style RLE is not supported")
            rgbe[y] = flat
            pos += 4 * width
    return HdrImage(rgbe_to_float(rgbe))


def _rle_encode_channel(row: np.ndarray) -> bytes:
    out = bytearray()
    n = len(row)
    i = 0
    while i < n:
        # find next run of >= 4 identical bytes
        j = i
        run_start, run_len = n, 0
        while j < n:
            k = j + 1
            while k < n and row[k] == row[j] and k - j < 127:
                k += 1
            if k - j >= 4:
                run_start, run_len = j, k - j
                break
            j = k
        while i < run_start:
            cnt = min(128, run_start - i)
            out.append(cnt)
            out += bytes(row[i:i + cnt])
            i += cnt
        if run_len:
            out.append(128 + run_len)
            out.append(int(row[run_start]))
            i = run_start + run_len
    return bytes(out)


def write_hdr(image: HdrImage, path, rle: bool = True) -> None:
    rgbe = float_to_rgbe(image.pixels)
    h, w = rgbe.shape[:2]
    use_rle = rle and 8 <= w <= 32767
    parts = [b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n", f"-Y {h} +X {w}\n".encode()]
    for y in range(h):
        if use_rle:
            parts.append(bytes([2, 2, w >> 8, w & 0xFF]))
            for c in range(4):
                parts.append(_rle_encode_channel(rgbe[y, :, c]))
        else:
            parts.append(rgbe[y].tobytes())
    _write_bytes(path, b"".join(parts))


# --- PFM -------------------------------------------------------------------

def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    while pos < len(data) and data[pos:pos + 1].isspace():
        pos += 1
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("malformed PFM header")
    return data[start:pos], pos


def read_pfm_array(path) -> np.ndarray:
    """Decode a PFM file to a top-down (H, W, C) float32 array."""
    with open(path, "rb") as f:
        data = f.read()
    tag, pos = _read_token(data, 0)
    if tag == b"PF":
        channels = 3
    elif tag == b"Pf":
        channels = 1
    else:
        raise ValueError(f"{path}: unsupported PFM identifier {tag!r}")
    try:
        w, pos = _read_token(data, pos)
        h, pos = _read_token(data, pos)
        s, pos = _read_token(data, pos)
        width, height, scale = int(w), int(h), float(s)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PFM header") from exc
    pos += 1  # single whitespace byte after the scale
    dtype = "<f4" if scale < 0 else ">f4"
    n = width * height * channels
    raw = data[pos:pos + 4 * n]
    if len(raw) != 4 * n:
        raise ValueError(f"{path}: pixel data length mismatch")
    arr = np.frombuffer(raw, dtype=dtype).reshape(height, width, channels)
    return arr[::-1].astype(np.float32)


def read_pfm(path) -> HdrImage:
    arr = read_pfm_array(path).astype(np.float64)
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    return HdrImage(np.maximum(arr, 0.0))


def write_pfm_array(pixels: np.ndarray, path) -> None:
    arr = np.asarray(pixels, dtype="<f4")
    if arr.ndim == 2:
        arr = arr[..., None]
    h, w, c = arr.shape
    tag = b"PF" if c == 3 else b"Pf"
    # negative scale marks little-endian samples; rows are stored bottom-up
    header = tag + f"\n{w} {h}\n-1.0\n".encode()
    _write_bytes(path, header + np.ascontiguousarray(arr[::-1]).tobytes())


def write_pfm(image: HdrImage, path) -> None:
    write_pfm_array(image.pixels, path)


def _write_bytes(path, payload: bytes) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(payload)


def load_hdr(path) -> HdrImage:
    """Load a Radiance .hdr or .pfm file as a linear HdrImage."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".hdr", ".pic", ".rgbe"):
        return read_hdr(path)
    if ext == ".pfm":
        return read_pfm(path)
    raise ValueError(f"unsupported HDR file extension {ext!r} (convert OpenEXR externally)")


def save_hdr(image: HdrImage, path) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pfm":
        write_pfm(image, path)
    elif ext in (".hdr", ".pic", ".rgbe"):
        write_hdr(image, path)
    else:
        raise ValueError(f"unsupported HDR file extension {ext!r}")
