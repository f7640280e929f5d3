"""Grayscale images on an inscribed-disk geometry, plus degradation generators.

Images carry float64 intensities in [0,1].  The coordinate frame used
throughout the package maps pixel (row i, col j) to Cartesian
x = j - cx, y = cy - i (y axis pointing up), with (cx, cy) the disk
center.  All degradations are pure functions of (input, parameters, seed).
"""
from __future__ import annotations

import dataclasses
import math
from pathlib import Path

import numpy as np

from .errors import NegativeVariance, TooSmall, UnreadableFile, UnsupportedFormat


@dataclasses.dataclass(frozen=True)
class DiskDomain:
    """Inscribed disk mapped to the unit disk: pixel distance / radius = r."""

    cx: float
    cy: float
    radius: float

    def pixel_mask(self, height: int, width: int) -> np.ndarray:
        """Boolean mask of pixels whose centers lie inside the disk."""
        ii, jj = np.mgrid[0:height, 0:width]
        return (jj - self.cx) ** 2 + (self.cy - ii) ** 2 <= self.radius**2


@dataclasses.dataclass
class GrayImage:
    """Row-major grayscale raster with intensities in [0,1]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError("pixels must be a 2-D array")
        if p.size == 0:
            raise ValueError("pixels must be non-empty")
        if not np.isfinite(p).all():
            raise ValueError("pixels must be finite")
        if p.min() < -1e-9 or p.max() > 1 + 1e-9:
            raise ValueError("intensities must lie in [0,1]")
        self.pixels = np.clip(p, 0.0, 1.0)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def disk_mask(img: GrayImage) -> DiskDomain:
    """Inscribed-disk mapping of an image.

    Center sits at ((w-1)/2, (h-1)/2) and the radius is min(w,h)/2, so
    the disk touches the shorter image edges.  Consumers treat pixels
    outside the disk as 0.
    """
    h, w = img.pixels.shape
    if min(h, w) < 8:
        raise TooSmall(f"need at least 8x8 pixels for disk processing, got {w}x{h}")
    return DiskDomain(cx=(w - 1) / 2.0, cy=(h - 1) / 2.0, radius=min(w, h) / 2.0)


def bilinear_sample(pixels: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Bilinear interpolation at fractional (row, col), zero outside the frame.

    Integer coordinates reproduce pixel values exactly, which makes
    90-degree rotations exact permutations.
    """
    h, w = pixels.shape
    r0 = np.floor(rows).astype(np.int64)
    c0 = np.floor(cols).astype(np.int64)
    fr = rows - r0
    fc = cols - c0

    out = np.zeros(np.broadcast(rows, cols).shape, dtype=np.float64)
    for dr, dc, weight in (
        (0, 0, (1 - fr) * (1 - fc)),
        (0, 1, (1 - fr) * fc),
        (1, 0, fr * (1 - fc)),
        (1, 1, fr * fc),
    ):
        rr = r0 + dr
        cc = c0 + dc
        inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        vals = np.where(inside, pixels[np.clip(rr, 0, h - 1), np.clip(cc, 0, w - 1)], 0.0)
        out += weight * vals
    return out


def rotate(img: GrayImage, angle_deg: float) -> GrayImage:
    """Rotate about the image center, counterclockwise, bilinear with zero fill.

    Pixels leaving the frame are dropped; pixels entering are 0.  For
    multiples of 90 degrees the trigonometric factors are taken from an
    exact table, so square images are permuted without resampling loss.
    """
    h, w = img.pixels.shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0

    quarter = angle_deg / 90.0
    if abs(quarter - round(quarter)) < 1e-12:
        k = int(round(quarter)) % 4
        ct = (1.0, 0.0, -1.0, 0.0)[k]
        st = (0.0, 1.0, 0.0, -1.0)[k]
    else:
        a = math.radians(angle_deg)
        ct, st = math.cos(a), math.sin(a)

    jj, ii = np.meshgrid(np.arange(w), np.arange(h))
    x = jj - cx
    y = cy - ii
    # inverse map: sample the source at the backward-rotated coordinate
    xs = x * ct + y * st
    ys = -x * st + y * ct
    src_rows = cy - ys
    src_cols = cx + xs
    return GrayImage(np.clip(bilinear_sample(img.pixels, src_rows, src_cols), 0.0, 1.0))


def add_gaussian_noise(img: GrayImage, variance: float, seed: int) -> GrayImage:
    """img + N(0, variance), clamped back to [0,1].

    The noise field is exactly ``default_rng(seed).normal(0, sqrt(variance),
    shape)``; this contract lets callers reproduce the unclamped field.
    """
    if variance < 0:
        raise NegativeVariance(f"variance must be >= 0, got {variance}")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(variance), img.pixels.shape)
    return GrayImage(np.clip(img.pixels + noise, 0.0, 1.0))


def _read_pgm(data: bytes) -> np.ndarray:
    """Parse P2 (ascii) or P5 (binary) PGM into a uint array scaled by maxval."""
    if data[:2] not in (b"P2", b"P5"):
        raise UnsupportedFormat("not a P2/P5 PGM file")
    magic = data[:2]

    # tokenize header: magic, width, height, maxval; '#' starts a comment
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UnreadableFile("truncated PGM header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise UnreadableFile("malformed PGM header") from exc
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise UnreadableFile("invalid PGM dimensions")

    if magic == b"P2":
        fields = data[pos:].split()
        if len(fields) < width * height:
            raise UnreadableFile("truncated P2 pixel data")
        arr = np.array(fields[: width * height], dtype=np.float64)
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        need = width * height * dtype.itemsize
        raw = data[pos : pos + need]
        if len(raw) < need:
            raise UnreadableFile("truncated P5 pixel data")
        arr = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    return (arr / maxval).reshape(height, width)


def load_gray(path: str | Path) -> GrayImage:
    """Load PNG or PGM (P2/P5) as grayscale in [0,1].

    Color inputs are reduced by the unweighted channel mean.  8-bit data
    is divided by 255 (16-bit by 65535), so the format maximum maps to 1.
    """
    path = Path(path)
    if not path.is_file():
        raise UnreadableFile(f"no such file: {path}")
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        try:
            return GrayImage(_read_pgm(path.read_bytes()))
        except (OSError, ValueError) as exc:
            raise UnreadableFile(f"cannot decode {path}: {exc}") from exc
    if suffix == ".png":
        from PIL import Image, UnidentifiedImageError

        try:
            with Image.open(path) as im:
                im.load()
                if im.mode in ("I", "I;16"):
                    arr = np.asarray(im, dtype=np.float64) / 65535.0
                else:
                    if im.mode not in ("L", "RGB"):
                        im = im.convert("RGB")
                    arr = np.asarray(im, dtype=np.float64) / 255.0
        except (UnidentifiedImageError, OSError) as exc:
            raise UnreadableFile(f"cannot decode {path}: {exc}") from exc
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        return GrayImage(np.clip(arr, 0.0, 1.0))
    raise UnsupportedFormat(f"unsupported raster format: {path.suffix!r}")


def save_gray(img: GrayImage, path: str | Path) -> None:
    """Write an image as 8-bit PNG or binary (P5) PGM, chosen by extension."""
    path = Path(path)
    data8 = np.round(img.pixels * 255).astype(np.uint8)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        header = f"P5\n{img.width} {img.height}\n255\n".encode()
        path.write_bytes(header + data8.tobytes())
    elif suffix == ".png":
        from PIL import Image

        Image.fromarray(data8, mode="L").save(path)
    else:
        raise UnsupportedFormat(f"unsupported raster format: {path.suffix!r}")
