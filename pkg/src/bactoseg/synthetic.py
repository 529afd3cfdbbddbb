"""Synthetic micrograph-like scenes with known ground truth.

Scenes imitate a gram-stained slide: a bright noisy background, dark
elliptical "bacteria" blobs, and small stained specks playing the role
of debris. Ground truth is the blob union only, so speck pixels that
survive segmentation count against IoU. Everything is deterministic in
the seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imaging import RasterImage, save_png
from .labels import LabelMap, save_label

BACKGROUND_COLOR = (226, 229, 234)
BLOB_COLOR = (70, 55, 110)      # violet stain
ARTIFACT_COLOR = (200, 40, 40)  # red debris, separable as a 3rd cluster


@dataclass(frozen=True, eq=False)
class Scene:
    image: RasterImage
    truth: np.ndarray  # (h, w) bool, blob union


def _ellipse(h: int, w: int, cx: int, cy: int, rx: int, ry: int) -> np.ndarray:
    yy, xx = np.ogrid[:h, :w]
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def _place_disjoint(rng: np.random.Generator, h: int, w: int, n: int,
                    rx_range: tuple[int, int], ry_range: tuple[int, int],
                    occupied: np.ndarray, gap: int) -> np.ndarray:
    """Union of n ellipses kept `gap` pixels away from borders, each other,
    and anything already occupied (so closing cannot bridge regions)."""
    placed = np.zeros((h, w), dtype=bool)
    attempts = 0
    count = 0
    while count < n and attempts < 10000:
        attempts += 1
        rx = int(rng.integers(rx_range[0], rx_range[1] + 1))
        ry = int(rng.integers(ry_range[0], ry_range[1] + 1))
        margin = max(rx, ry) + gap
        if 2 * margin >= min(h, w):
            continue
        cx = int(rng.integers(margin, w - margin))
        cy = int(rng.integers(margin, h - margin))
        shape = _ellipse(h, w, cx, cy, rx, ry)
        halo = _ellipse(h, w, cx, cy, rx + gap, ry + gap)
        if (halo & (occupied | placed)).any():
            continue
        placed |= shape
        count += 1
    if count < n:
        raise RuntimeError(f"could only place {count}/{n} shapes")
    return placed


def make_scene(seed: int = 0, size: int = 512, n_blobs: int = 10, n_specks: int = 30,
               speck_color: tuple[int, int, int] | None = None,
               speck_radius: tuple[int, int] = (1, 3)) -> Scene:
    """Bright noisy background + n_blobs dark ellipses (the ground truth)
    + n_specks small debris ellipses. Speck color defaults to the blob
    color (debris indistinguishable by color, as on a real slide)."""
    rng = np.random.default_rng(seed)
    h = w = size

    # separation large enough that a closing kernel cannot bridge shapes
    gap = max(6, size // 36)
    blob_r = max(3, size // 18)
    blobs = _place_disjoint(rng, h, w, n_blobs,
                            (blob_r, int(blob_r * 1.8)), (max(2, int(blob_r * 0.6)), blob_r),
                            occupied=np.zeros((h, w), dtype=bool), gap=gap)
    specks = _place_disjoint(rng, h, w, n_specks, speck_radius, speck_radius,
                             occupied=blobs, gap=gap)

    img = np.empty((h, w, 3), dtype=np.float64)
    img[:] = BACKGROUND_COLOR
    img += rng.normal(0.0, 5.0, size=(h, w, 3))
    img[blobs] = BLOB_COLOR + rng.normal(0.0, 4.0, size=(int(blobs.sum()), 3))
    color = BLOB_COLOR if speck_color is None else speck_color
    img[specks] = color + rng.normal(0.0, 4.0, size=(int(specks.sum()), 3))

    return Scene(image=RasterImage(np.clip(np.rint(img), 0, 255).astype(np.uint8)),
                 truth=blobs)


def truth_label(scene: Scene, species_id: int) -> LabelMap:
    return LabelMap(np.where(scene.truth, np.uint8(species_id), np.uint8(0)))


def write_mini_dataset(root: str | Path, species: tuple[str, ...] = ("blobus_demo", "stainia_demo"),
                       images_per_species: int = 3, size: int = 128,
                       seed: int = 0, n_blobs: int = 3, n_specks: int = 5) -> dict[str, list[Path]]:
    """A tiny DIBaS-shaped tree for tests and demos: one directory per
    species, each holding deterministic synthetic scenes. Returns the
    ground-truth label paths it wrote alongside (under <root>_truth)."""
    root = Path(root)
    truth_root = root.parent / (root.name + "_truth")
    written: dict[str, list[Path]] = {}
    # ids must agree with ingestion, which numbers sorted directories
    for s_idx, name in enumerate(sorted(species)):
        sdir = root / name
        sdir.mkdir(parents=True, exist_ok=True)
        tdir = truth_root / name
        tdir.mkdir(parents=True, exist_ok=True)
        written[name] = []
        for i in range(images_per_species):
            scene = make_scene(seed=seed + 1000 * s_idx + i, size=size,
                               n_blobs=n_blobs, n_specks=n_specks)
            img_path = sdir / f"{name}_{i:04d}.png"
            save_png(scene.image, img_path)
            save_label(truth_label(scene, species_id=s_idx + 1), tdir / f"{name}_{i:04d}.png")
            written[name].append(img_path)
    return written
