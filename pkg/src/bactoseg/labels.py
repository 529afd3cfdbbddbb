"""Label maps: per-pixel class indices, 0 = background, 1..33 = species."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .imaging import BinaryMask

MAX_SPECIES = 33


@dataclass(frozen=True, eq=False)
class LabelMap:
    classes: np.ndarray  # (h, w) uint8, values 0..33

    def __post_init__(self):
        c = self.classes
        if c.ndim != 2 or c.dtype != np.uint8:
            raise ValueError(f"expected (h, w) uint8 array, got {c.shape} {c.dtype}")
        if c.max(initial=0) > MAX_SPECIES:
            raise ValueError(f"class values must be <= {MAX_SPECIES}")

    @property
    def width(self) -> int:
        return self.classes.shape[1]

    @property
    def height(self) -> int:
        return self.classes.shape[0]


def mask_to_label(mask: BinaryMask, species_id: int) -> LabelMap:
    if not 1 <= species_id <= MAX_SPECIES:
        raise ValueError(f"species_id must be in 1..{MAX_SPECIES}, got {species_id}")
    return LabelMap(np.where(mask.bits, np.uint8(species_id), np.uint8(0)))


def label_to_mask(label: LabelMap) -> tuple[BinaryMask, int]:
    """Invert mask_to_label; returns the mask and the (single) species id,
    or id 0 for an all-background label."""
    fg_values = np.unique(label.classes[label.classes > 0])
    if len(fg_values) > 1:
        raise ValueError(f"label map holds several species: {fg_values.tolist()}")
    species_id = int(fg_values[0]) if len(fg_values) else 0
    return BinaryMask(label.classes > 0), species_id


def save_label(label: LabelMap, path: str | os.PathLike) -> None:
    """8-bit single-channel PNG whose pixel values are the class indices."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(label.classes, mode="L").save(path, format="PNG")


def load_label(path: str | os.PathLike) -> LabelMap:
    with Image.open(path) as im:
        if im.mode != "L":
            im = im.convert("L")
        return LabelMap(np.asarray(im, dtype=np.uint8).copy())
