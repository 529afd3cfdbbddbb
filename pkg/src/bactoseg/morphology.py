"""Binary morphology with discrete disk structuring elements.

Cleanup of segmentation masks uses closing (fill small gaps) or opening
(drop small specks) with a circular kernel whose diameter is chosen per
species. A reported kernel size of NxN means the disk of diameter N
inscribed in an NxN box. Out-of-bounds pixels read as background for
both dilation and erosion, so erosion shrinks at image borders.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvenOrNonPositiveDiameterError
from .imaging import BinaryMask


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """Disk-shaped offset neighborhood; point-symmetric, contains (0,0)."""

    diameter: int
    offsets: np.ndarray  # (m, 2) int rows of (dx, dy)

    @property
    def radius(self) -> int:
        return (self.diameter - 1) // 2


def disk_kernel(diameter: int) -> StructuringElement:
    """All integer offsets (dx, dy) with dx^2 + dy^2 <= ((diameter-1)/2)^2."""
    if diameter < 1 or diameter % 2 == 0:
        raise EvenOrNonPositiveDiameterError(f"diameter must be odd and >= 1, got {diameter}")
    r = (diameter - 1) // 2
    span = np.arange(-r, r + 1)
    dx, dy = np.meshgrid(span, span)
    keep = dx * dx + dy * dy <= r * r
    offsets = np.stack([dx[keep], dy[keep]], axis=1).astype(np.int64)
    return StructuringElement(diameter=diameter, offsets=offsets)


def dilate(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Output (x,y) is set iff some (dx,dy) in the disk has (x-dx, y-dy) set."""
    return BinaryMask(_shift_reduce(mask.bits, se, dilating=True))


def erode(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Output (x,y) is set iff every (dx,dy) in the disk has (x+dx, y+dy) set."""
    return BinaryMask(_shift_reduce(mask.bits, se, dilating=False))


def close(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return erode(dilate(mask, se), se)


def open_(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    return dilate(erode(mask, se), se)


def _shift_reduce(bits: np.ndarray, se: StructuringElement, dilating: bool) -> np.ndarray:
    """OR (dilate) or AND (erode) of the mask shifted by each disk offset,
    reading outside the frame as background."""
    h, w = bits.shape
    r = se.radius
    pad = np.zeros((h + 2 * r, w + 2 * r), dtype=bool)
    pad[r:r + h, r:r + w] = bits

    out = np.zeros((h, w), dtype=bool) if dilating else np.ones((h, w), dtype=bool)
    for dx, dy in se.offsets:
        # dilate reads source at (x-dx, y-dy); erode at (x+dx, y+dy)
        sx, sy = (-dx, -dy) if dilating else (dx, dy)
        window = pad[r + sy:r + sy + h, r + sx:r + sx + w]
        if dilating:
            out |= window
        else:
            out &= window
    return out
