"""512x512 patch extraction with lockstep image/label augmentation.

Training patches overlap (stride < size); validation patches tile the
image exactly (stride == size). Edge remainders get one final
edge-aligned patch so no pixel is dropped. Augmentations are right-angle
rotations, flips, and integer shifts so label maps stay exact; random
parameters come from a seeded RNG and the resolved operations are
recorded on the patch.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import PatchLargerThanImageError, ShiftTooLargeError
from .imaging import RasterImage
from .labels import LabelMap

DEFAULT_PATCH_SIZE = 512
DEFAULT_TRAIN_STRIDE = 256


@dataclass(frozen=True, eq=False)
class Patch:
    x: int
    y: int
    image: RasterImage
    label: LabelMap
    augmentations: tuple[dict, ...] = ()


@dataclass(frozen=True, eq=False)
class PatchSet:
    patch_size: int
    stride: int
    patches: tuple[Patch, ...]


def grid_origins(extent: int, size: int, stride: int) -> list[int]:
    """Multiples of stride while the patch fits, plus a final edge-aligned
    origin when the grid stops short of the far edge."""
    origins = list(range(0, extent - size + 1, stride))
    if origins[-1] + size < extent:
        origins.append(extent - size)
    return origins


def extract_patches(img: RasterImage, label: LabelMap,
                    size: int = DEFAULT_PATCH_SIZE, stride: int | None = None) -> PatchSet:
    if stride is None:
        stride = size
    if size > min(img.width, img.height):
        raise PatchLargerThanImageError(
            f"patch {size} exceeds image {img.width}x{img.height}")
    if not 1 <= stride <= size:
        raise ValueError(f"stride must be in 1..{size}, got {stride}")
    if (label.height, label.width) != (img.height, img.width):
        raise ValueError("image and label dimensions differ")

    patches = []
    for y in grid_origins(img.height, size, stride):
        for x in grid_origins(img.width, size, stride):
            patches.append(Patch(
                x=x, y=y,
                image=RasterImage(img.pixels[y:y + size, x:x + size].copy()),
                label=LabelMap(label.classes[y:y + size, x:x + size].copy())))
    return PatchSet(patch_size=size, stride=stride, patches=tuple(patches))


def augment(patch: Patch, ops: list[dict], seed: int = 0) -> Patch:
    """Apply geometric ops to image and label together.

    Each op is a dict: {"op": "rot90", "k": int} (quarter turns CCW),
    {"op": "hflip"}, {"op": "vflip"}, or {"op": "shift", "dx": int, "dy": int}.
    Omitted parameters ("k", "dx"/"dy") are drawn from a seeded RNG;
    random shifts need "max_shift". The fully resolved ops are appended
    to the patch's augmentation record.
    """
    rng = np.random.default_rng(seed)
    size = min(patch.image.width, patch.image.height)
    resolved = [_resolve_op(op, rng, size) for op in ops]

    pixels = patch.image.pixels
    classes = patch.label.classes
    for op in resolved:
        pixels = _apply_op(pixels, op)
        classes = _apply_op(classes, op)
    return replace(patch, image=RasterImage(pixels.copy()),
                   label=LabelMap(classes.copy()),
                   augmentations=patch.augmentations + tuple(resolved))


def apply_recorded(image: RasterImage, label: LabelMap,
                   record: tuple[dict, ...]) -> tuple[RasterImage, LabelMap]:
    """Replay a recorded augmentation on fresh crops (lockstep check)."""
    pixels, classes = image.pixels, label.classes
    for op in record:
        pixels = _apply_op(pixels, op)
        classes = _apply_op(classes, op)
    return RasterImage(pixels.copy()), LabelMap(classes.copy())


def _resolve_op(op: dict, rng: np.random.Generator, size: int) -> dict:
    kind = op["op"]
    if kind == "rot90":
        k = op.get("k")
        if k is None:
            k = int(rng.integers(0, 4))
        return {"op": "rot90", "k": int(k) % 4}
    if kind in ("hflip", "vflip"):
        return {"op": kind}
    if kind == "shift":
        dx, dy = op.get("dx"), op.get("dy")
        if dx is None or dy is None:
            m = int(op["max_shift"])
            if dx is None:
                dx = int(rng.integers(-m, m + 1))
            if dy is None:
                dy = int(rng.integers(-m, m + 1))
        if abs(dx) >= size or abs(dy) >= size:
            raise ShiftTooLargeError(f"shift ({dx}, {dy}) >= patch size {size}")
        return {"op": "shift", "dx": int(dx), "dy": int(dy)}
    raise ValueError(f"unknown augmentation op {kind!r}")


def _apply_op(arr: np.ndarray, op: dict) -> np.ndarray:
    kind = op["op"]
    if kind == "rot90":
        return np.rot90(arr, k=op["k"], axes=(0, 1))
    if kind == "hflip":
        return arr[:, ::-1]
    if kind == "vflip":
        return arr[::-1, :]
    if kind == "shift":
        return _shift(arr, op["dx"], op["dy"])
    raise ValueError(f"unknown augmentation op {kind!r}")


def _shift(arr: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Translate content by (dx, dy); vacated pixels become background
    (class 0 / black)."""
    out = np.zeros_like(arr)
    h, w = arr.shape[:2]
    src_x = slice(max(0, -dx), min(w, w - dx))
    src_y = slice(max(0, -dy), min(h, h - dy))
    dst_x = slice(max(0, dx), min(w, w + dx))
    dst_y = slice(max(0, dy), min(h, h + dy))
    out[dst_y, dst_x] = arr[src_y, src_x]
    return out
