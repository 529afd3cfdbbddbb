import csv
from pathlib import Path

import numpy as np
import pytest

from bactoseg.imaging import RasterImage
from bactoseg.metrics import MetricsRow

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def reference_rows() -> list[MetricsRow]:
    """Published per-species scores for the DIBaS segmentation benchmark.

    Rows are addressed by index: the source table lists the same name for
    rows 7 and 8 (the first is presumably Enterococcus faecalis); kept
    verbatim, uncorrected.
    """
    rows = []
    with open(DATA_DIR / "reference_scores.csv", newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(MetricsRow(class_name=rec["class"],
                                   precision=float(rec["precision"]),
                                   recall=float(rec["recall"]),
                                   f1=float(rec["f1"]),
                                   iou=float(rec["iou"]),
                                   accuracy=float(rec["accuracy"])))
    assert len(rows) == 33
    return rows


@pytest.fixture
def random_image():
    def make(seed: int, width: int = 32, height: int = 32) -> RasterImage:
        rng = np.random.default_rng(seed)
        return RasterImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))
    return make


@pytest.fixture(scope="session")
def mini_dataset(tmp_path_factory):
    """Two-species synthetic tree plus ground-truth labels and configs."""
    from bactoseg.pipeline import SpeciesConfig
    from bactoseg.synthetic import write_mini_dataset

    root = tmp_path_factory.mktemp("mini") / "dataset"
    write_mini_dataset(root, species=("blobus_demo", "stainia_demo"),
                       images_per_species=3, size=128, seed=11)
    configs = {
        1: SpeciesConfig(species_id=1, method="kmeans", k=2, foreground="darkest",
                         cleanup="close", kernel_diameter=5, seed=3),
        2: SpeciesConfig(species_id=2, method="otsu", polarity="dark",
                         cleanup="close", kernel_diameter=5, seed=3),
    }
    return {"root": root, "truth": root.parent / (root.name + "_truth"),
            "configs": configs}
