"""Dataset ingestion, per-species recipes, and the semi-automatic labeling
pipeline: segment (k-means or Otsu) -> morphological cleanup -> label export.

The DIBaS layout is one directory per species, 20 micrographs each,
2048x1532. Species ids are the 1-based position of the directory in
sorted order; deviations from the expected counts or dimensions are
recorded as warnings, never fatal, so the tool runs on subsets.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import clustering, morphology, thresholding
from .errors import (BadRatiosError, MissingConfigError, NoImagesFoundError,
                     RootNotFoundError)
from .imaging import BinaryMask, RasterImage, histogram, load_image, to_grayscale
from .labels import LabelMap, mask_to_label, save_label

CONFIG_SCHEMA_VERSION = 1
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".tif", ".tiff")
EXPECTED_DIMENSIONS = (2048, 1532)
EXPECTED_PER_SPECIES = 20
DEFAULT_RATIOS = (0.6, 0.2, 0.2)

METHOD_KMEANS = "kmeans"
METHOD_OTSU = "otsu"
CLEANUPS = ("close", "open", "none")


@dataclass(frozen=True)
class SpeciesConfig:
    """Human-chosen recipe for one species.

    kmeans: k in {2, 3} with a foreground-cluster choice ("darkest" or an
    explicit index list). otsu: a polarity. Either way the mask is then
    cleaned with a disk kernel (close, open, or none).
    """

    species_id: int
    method: str = METHOD_KMEANS
    k: int = 2
    foreground: str | tuple[int, ...] = "darkest"
    polarity: str = thresholding.DARK_FOREGROUND
    cleanup: str = "close"
    kernel_diameter: int = 9
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.foreground, str):
            object.__setattr__(self, "foreground", tuple(int(i) for i in self.foreground))
        if not 1 <= self.species_id <= 33:
            raise ValueError(f"species_id must be in 1..33, got {self.species_id}")
        if self.method not in (METHOD_KMEANS, METHOD_OTSU):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == METHOD_KMEANS and self.k not in (2, 3):
            raise ValueError(f"k must be 2 or 3, got {self.k}")
        if self.cleanup not in CLEANUPS:
            raise ValueError(f"cleanup must be one of {CLEANUPS}, got {self.cleanup!r}")
        if self.kernel_diameter < 1 or self.kernel_diameter % 2 == 0:
            raise ValueError(f"kernel_diameter must be odd >= 1, got {self.kernel_diameter}")

    def to_dict(self) -> dict:
        d = {"method": self.method, "cleanup": self.cleanup,
             "kernel_diameter": self.kernel_diameter, "seed": self.seed}
        if self.method == METHOD_KMEANS:
            d["k"] = self.k
            d["foreground"] = (self.foreground if isinstance(self.foreground, str)
                               else list(self.foreground))
        else:
            d["polarity"] = self.polarity
        return d

    @classmethod
    def from_dict(cls, d: dict, species_id: int) -> "SpeciesConfig":
        fg = d.get("foreground", "darkest")
        if not isinstance(fg, str):
            fg = tuple(int(i) for i in fg)
        return cls(species_id=species_id,
                   method=d.get("method", METHOD_KMEANS),
                   k=int(d.get("k", 2)),
                   foreground=fg,
                   polarity=d.get("polarity", thresholding.DARK_FOREGROUND),
                   cleanup=d.get("cleanup", "close"),
                   kernel_diameter=int(d.get("kernel_diameter", 9)),
                   seed=int(d.get("seed", 0)))


@dataclass(frozen=True)
class ManifestEntry:
    species_id: int
    species_name: str
    image_path: str
    split: str = "train"  # train | val | test


@dataclass
class DatasetManifest:
    root: str
    entries: list[ManifestEntry]
    warnings: list[str] = field(default_factory=list)

    def species(self) -> dict[int, str]:
        """species_id -> name, ascending."""
        return {e.species_id: e.species_name for e in
                sorted(self.entries, key=lambda e: e.species_id)}

    def entries_for(self, species_id: int) -> list[ManifestEntry]:
        return [e for e in self.entries if e.species_id == species_id]

    def to_dict(self) -> dict:
        return {"root": self.root,
                "entries": [vars(e) for e in self.entries],
                "warnings": self.warnings}

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        return cls(root=d["root"],
                   entries=[ManifestEntry(**e) for e in d["entries"]],
                   warnings=list(d.get("warnings", [])))

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "DatasetManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))


def ingest_dibas(root: str | os.PathLike) -> DatasetManifest:
    """Scan a species-per-directory tree into a manifest.

    Ids follow sorted directory order (which matches the published species
    ordering for the full dataset, since both are alphabetical).
    """
    root = Path(root)
    if not root.is_dir():
        raise RootNotFoundError(str(root))

    warnings: list[str] = []
    entries: list[ManifestEntry] = []
    species_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    for species_id, sdir in enumerate(species_dirs, start=1):
        images = sorted(p for p in sdir.iterdir()
                        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
        kept = 0
        for img_path in images:
            try:
                with Image.open(img_path) as im:
                    size = im.size
            except (UnidentifiedImageError, OSError) as exc:
                warnings.append(f"{img_path}: undecodable, skipped ({exc})")
                continue
            if size != EXPECTED_DIMENSIONS:
                warnings.append(f"{img_path}: size {size[0]}x{size[1]} "
                                f"!= {EXPECTED_DIMENSIONS[0]}x{EXPECTED_DIMENSIONS[1]}")
            entries.append(ManifestEntry(species_id=species_id, species_name=sdir.name,
                                         image_path=str(img_path.relative_to(root))))
            kept += 1
        if kept and kept != EXPECTED_PER_SPECIES:
            warnings.append(f"{sdir.name}: {kept} images, expected {EXPECTED_PER_SPECIES}")

    if not entries:
        raise NoImagesFoundError(str(root))
    return DatasetManifest(root=str(root), entries=entries, warnings=warnings)


def split_dataset(manifest: DatasetManifest,
                  ratios: tuple[float, float, float] = DEFAULT_RATIOS,
                  seed: int = 0) -> DatasetManifest:
    """Stratified train/val/test assignment, shuffled per species by a
    seeded RNG. Rounding remainders go to train."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatiosError(f"ratios {ratios} do not sum to 1")
    rng = np.random.default_rng(seed)
    new_entries: list[ManifestEntry] = []
    for species_id in sorted({e.species_id for e in manifest.entries}):
        group = manifest.entries_for(species_id)
        order = rng.permutation(len(group))
        n = len(group)
        n_val = int(n * ratios[1] + 1e-9)
        n_test = int(n * ratios[2] + 1e-9)
        n_train = n - n_val - n_test
        splits = ["train"] * n_train + ["val"] * n_val + ["test"] * n_test
        for pos, split in zip(order, splits):
            new_entries.append(replace(group[pos], split=split))
    new_entries.sort(key=lambda e: (e.species_id, e.image_path))
    return DatasetManifest(root=manifest.root, entries=new_entries,
                           warnings=list(manifest.warnings))


def annotate_image(img: RasterImage, cfg: SpeciesConfig) -> BinaryMask:
    """Segment with the configured method, then apply the configured cleanup."""
    mask, _ = annotate_image_with_details(img, cfg)
    return mask


def annotate_image_with_details(img: RasterImage, cfg: SpeciesConfig) -> tuple[BinaryMask, dict]:
    """annotate_image plus the intermediate values a reviewer judges by:
    centroids and chosen clusters for k-means, threshold and variance for
    Otsu."""
    details: dict = {"method": cfg.method}
    if cfg.method == METHOD_KMEANS:
        model = clustering.kmeans_rgb(img, cfg.k, seed=cfg.seed)
        fg = clustering.select_foreground_clusters(model, cfg.foreground)
        mask = clustering.assignment_to_mask(model, fg)
        details["centroids"] = [[round(float(v), 2) for v in c] for c in model.centroids]
        details["foreground_clusters"] = sorted(fg)
    else:
        gray = to_grayscale(img)
        result = thresholding.otsu_threshold(histogram(gray))
        mask = thresholding.apply_threshold(gray, result.threshold, cfg.polarity)
        details["threshold"] = result.threshold
        details["sigma_b2"] = result.sigma_b2
    if cfg.cleanup != "none":
        se = morphology.disk_kernel(cfg.kernel_diameter)
        op = morphology.close if cfg.cleanup == "close" else morphology.open_
        mask = op(mask, se)
    return mask, details


def export_label(mask: BinaryMask, species_id: int, path: str | os.PathLike) -> LabelMap:
    """Write the mask as an 8-bit PNG with foreground == species_id."""
    label = mask_to_label(mask, species_id)
    save_label(label, path)
    return label


@dataclass(frozen=True)
class AnnotationRecord:
    image_path: str
    label_path: str
    species_id: int
    foreground_fraction: float
    error: str = ""


@dataclass
class RunReport:
    records: list[AnnotationRecord]

    @property
    def failures(self) -> list[AnnotationRecord]:
        return [r for r in self.records if r.error]

    def to_dict(self) -> dict:
        return {"records": [vars(r) for r in self.records],
                "failure_count": len(self.failures)}

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def batch_annotate(manifest: DatasetManifest, configs: dict[int, SpeciesConfig],
                   out_dir: str | os.PathLike) -> RunReport:
    """Annotate and export every manifest entry; fail fast when any species
    lacks a config. Record order follows the manifest."""
    missing = sorted({e.species_id for e in manifest.entries} - set(configs))
    if missing:
        names = {e.species_id: e.species_name for e in manifest.entries}
        raise MissingConfigError(f"no config for species {[names[i] for i in missing]}")

    out_dir = Path(out_dir)
    root = Path(manifest.root)
    records: list[AnnotationRecord] = []
    for entry in manifest.entries:
        label_path = out_dir / entry.species_name / (Path(entry.image_path).stem + ".png")
        try:
            img = load_image(root / entry.image_path)
            mask = annotate_image(img, configs[entry.species_id])
            export_label(mask, entry.species_id, label_path)
            records.append(AnnotationRecord(
                image_path=entry.image_path, label_path=str(label_path),
                species_id=entry.species_id,
                foreground_fraction=mask.foreground_fraction()))
        except Exception as exc:  # recorded, batch continues
            records.append(AnnotationRecord(
                image_path=entry.image_path, label_path="",
                species_id=entry.species_id, foreground_fraction=0.0,
                error=f"{type(exc).__name__}: {exc}"))
    return RunReport(records=records)


def load_configs(path: str | os.PathLike, manifest: DatasetManifest) -> dict[int, SpeciesConfig]:
    """Read the species-name-keyed config document and resolve ids via the
    manifest."""
    doc = json.loads(Path(path).read_text())
    by_name = doc.get("species", {})
    name_to_id = {name: sid for sid, name in manifest.species().items()}
    configs: dict[int, SpeciesConfig] = {}
    for name, cfg_dict in by_name.items():
        if name in name_to_id:
            sid = name_to_id[name]
            configs[sid] = SpeciesConfig.from_dict(cfg_dict, species_id=sid)
    return configs


def save_configs(configs: dict[int, SpeciesConfig], names: dict[int, str],
                 path: str | os.PathLike) -> None:
    doc = {"schema_version": CONFIG_SCHEMA_VERSION,
           "species": {names[sid]: cfg.to_dict() for sid, cfg in sorted(configs.items())}}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
