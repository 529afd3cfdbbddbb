"""Raster primitives: decode/encode, grayscale conversion, histograms, overlays.

All types wrap numpy arrays and are treated as immutable values; every
function returns a new object and is safe to call concurrently.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, DimensionMismatchError, UnsupportedFormatError

ACCEPTED_FORMATS = ("PNG", "JPEG", "TIFF")

# ITU-R BT.601 luma, scaled to integers so gray inputs (v,v,v) map back to v
# exactly: (299+587+114)*v = 1000*v. Halves round up.
_LUMA_WEIGHTS = np.array([299, 587, 114], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit RGB raster, pixels shaped (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"expected (h, w, 3) uint8 array, got {p.shape} {p.dtype}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image dimensions must be positive")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit luminance raster, values shaped (height, width)."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.dtype != np.uint8:
            raise ValueError(f"expected (h, w) uint8 array, got {v.shape} {v.dtype}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("image dimensions must be positive")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class Histogram256:
    """Counts of the 256 possible luminance values."""

    bins: np.ndarray

    def __post_init__(self):
        b = self.bins
        if b.shape != (256,) or not np.issubdtype(b.dtype, np.integer):
            raise ValueError("expected 256 integer bins")
        if (b < 0).any():
            raise ValueError("bin counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.bins.sum())


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Per-pixel foreground flags, bits shaped (height, width)."""

    bits: np.ndarray

    def __post_init__(self):
        b = self.bits
        if b.ndim != 2 or b.dtype != np.bool_:
            raise ValueError(f"expected (h, w) bool array, got {b.shape} {b.dtype}")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def foreground_fraction(self) -> float:
        return float(self.bits.mean())


# magic-number prefixes of the accepted formats
_SIGNATURES = (b"\x89PNG\r\n\x1a\n", b"\xff\xd8\xff", b"II*\x00", b"MM\x00*")


def load_image(path: str | os.PathLike) -> RasterImage:
    """Decode a PNG/JPEG/TIFF file into an RGB raster.

    16-bit sources are reduced to 8 bits by keeping the high byte. Palette
    and alpha images are converted to plain RGB.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        with Image.open(path) as im:
            if im.format not in ACCEPTED_FORMATS:
                raise UnsupportedFormatError(f"{path}: format {im.format!r} not supported")
            im.load()
            arr = _to_rgb_array(im)
    except UnidentifiedImageError as exc:
        # a recognizable header that still fails to parse is a broken file,
        # not a foreign format
        head = path.open("rb").read(8)
        if any(head.startswith(sig) for sig in _SIGNATURES):
            raise CorruptImageError(f"{path}: {exc}") from exc
        raise UnsupportedFormatError(f"{path}: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{path}: {exc}") from exc
    return RasterImage(arr)


def _to_rgb_array(im: Image.Image) -> np.ndarray:
    if im.mode in ("I;16", "I;16B", "I;16L", "I"):
        raw = np.asarray(im)
        high = (raw.astype(np.uint32) >> 8).clip(0, 255).astype(np.uint8)
        return np.stack([high] * 3, axis=-1)
    if im.mode != "RGB":
        im = im.convert("RGB")
    return np.asarray(im, dtype=np.uint8).copy()


def save_png(img: RasterImage | GrayImage, path: str | os.PathLike) -> None:
    """Encode to PNG (the only supported output format)."""
    arr = img.pixels if isinstance(img, RasterImage) else img.values
    Image.fromarray(arr).save(path, format="PNG")


def to_grayscale(img: RasterImage) -> GrayImage:
    """BT.601 luma: round(0.299 r + 0.587 g + 0.114 b)."""
    scaled = img.pixels.astype(np.int64) @ _LUMA_WEIGHTS
    values = ((scaled + 500) // 1000).clip(0, 255).astype(np.uint8)
    return GrayImage(values)


def histogram(gray: GrayImage) -> Histogram256:
    bins = np.bincount(gray.values.ravel(), minlength=256).astype(np.int64)
    return Histogram256(bins)


def overlay(img: RasterImage, mask: BinaryMask, color: tuple[int, int, int],
            alpha: float) -> RasterImage:
    """Blend `color` over the mask's foreground pixels; background untouched."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise DimensionMismatchError(
            f"image {img.width}x{img.height} vs mask {mask.width}x{mask.height}")
    blended = img.pixels.astype(np.float64)
    fg = mask.bits
    blended[fg] = (1.0 - alpha) * blended[fg] + alpha * np.asarray(color, dtype=np.float64)
    return RasterImage(np.rint(blended).clip(0, 255).astype(np.uint8))
