import json

import numpy as np
import pytest

from bactoseg.errors import (BadRatiosError, MissingConfigError, NoImagesFoundError,
                             RootNotFoundError)
from bactoseg.imaging import BinaryMask, save_png
from bactoseg.labels import load_label
from bactoseg.pipeline import (DatasetManifest, SpeciesConfig, annotate_image, batch_annotate,
                               export_label, ingest_dibas, load_configs, save_configs,
                               split_dataset)
from bactoseg.synthetic import make_scene, write_mini_dataset


def iou_against(truth: np.ndarray, mask: BinaryMask) -> float:
    inter = int((truth & mask.bits).sum())
    union = int((truth | mask.bits).sum())
    return inter / union


class TestSpeciesConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SpeciesConfig(species_id=0)
        with pytest.raises(ValueError):
            SpeciesConfig(species_id=1, k=4)
        with pytest.raises(ValueError):
            SpeciesConfig(species_id=1, kernel_diameter=4)
        with pytest.raises(ValueError):
            SpeciesConfig(species_id=1, cleanup="blur")

    def test_json_round_trip(self):
        cfg = SpeciesConfig(species_id=3, method="kmeans", k=3, foreground=(0, 2),
                            cleanup="open", kernel_diameter=13, seed=99)
        back = SpeciesConfig.from_dict(cfg.to_dict(), species_id=3)
        assert back == cfg

        otsu_cfg = SpeciesConfig(species_id=5, method="otsu", polarity="bright",
                                 kernel_diameter=5)
        assert SpeciesConfig.from_dict(otsu_cfg.to_dict(), species_id=5) == otsu_cfg


class TestIngest:
    def test_missing_root(self, tmp_path):
        with pytest.raises(RootNotFoundError):
            ingest_dibas(tmp_path / "nope")

    def test_empty_root(self, tmp_path):
        (tmp_path / "speciesA").mkdir()
        with pytest.raises(NoImagesFoundError):
            ingest_dibas(tmp_path)

    def test_small_tree_with_count_warning(self, tmp_path):
        from bactoseg.imaging import RasterImage
        sdir = tmp_path / "speciesA"
        sdir.mkdir()
        for i in range(2):
            save_png(RasterImage(np.full((4, 4, 3), 50 * (i + 1), dtype=np.uint8)),
                     sdir / f"img_{i}.png")
        manifest = ingest_dibas(tmp_path)
        assert len(manifest.entries) == 2
        assert manifest.species() == {1: "speciesA"}
        assert any("expected 20" in w for w in manifest.warnings)
        assert any("!= 2048x1532" in w for w in manifest.warnings)

    def test_full_shape_tree(self, tmp_path):
        from bactoseg.imaging import RasterImage
        rng = np.random.default_rng(0)
        for s in range(33):
            sdir = tmp_path / f"species_{s:02d}"
            sdir.mkdir()
            for i in range(20):
                save_png(RasterImage(rng.integers(0, 256, (4, 4, 3), dtype=np.uint8)),
                         sdir / f"img_{i:02d}.png")
        manifest = ingest_dibas(tmp_path)
        assert len(manifest.entries) == 660
        assert len(manifest.species()) == 33
        # ids follow sorted directory order
        assert manifest.species()[1] == "species_00"
        assert manifest.species()[33] == "species_32"

    def test_ids_follow_sorted_directory_order(self, tmp_path):
        from bactoseg.imaging import RasterImage
        for name in ("zeta", "alpha"):
            (tmp_path / name).mkdir()
            save_png(RasterImage(np.zeros((2, 2, 3), dtype=np.uint8)),
                     tmp_path / name / "a.png")
        manifest = ingest_dibas(tmp_path)
        assert manifest.species() == {1: "alpha", 2: "zeta"}


class TestSplit:
    def _manifest20(self, tmp_path):
        root = tmp_path / "ds"
        write_mini_dataset(root, species=("sp_a", "sp_b"), images_per_species=20,
                           size=64, n_blobs=2, n_specks=2)
        return ingest_dibas(root)

    def test_default_ratio_counts(self, tmp_path):
        manifest = self._manifest20(tmp_path)
        out = split_dataset(manifest, seed=5)
        for sid in (1, 2):
            splits = [e.split for e in out.entries_for(sid)]
            assert splits.count("train") == 12
            assert splits.count("val") == 4
            assert splits.count("test") == 4

    def test_all_train(self, tmp_path):
        manifest = self._manifest20(tmp_path)
        out = split_dataset(manifest, ratios=(1.0, 0.0, 0.0), seed=1)
        assert all(e.split == "train" for e in out.entries)

    def test_deterministic_in_seed(self, tmp_path):
        manifest = self._manifest20(tmp_path)
        a = split_dataset(manifest, seed=9)
        b = split_dataset(manifest, seed=9)
        assert [(e.image_path, e.split) for e in a.entries] == \
               [(e.image_path, e.split) for e in b.entries]

    def test_bad_ratios(self, tmp_path):
        manifest = self._manifest20(tmp_path)
        with pytest.raises(BadRatiosError):
            split_dataset(manifest, ratios=(0.5, 0.2, 0.2))

    def test_manifest_json_round_trip(self, tmp_path):
        manifest = split_dataset(self._manifest20(tmp_path), seed=3)
        path = tmp_path / "manifest.json"
        manifest.save(path)
        back = DatasetManifest.load(path)
        assert back.root == manifest.root
        assert back.entries == manifest.entries


class TestAnnotate:
    def test_kmeans_recipe_recovers_synthetic_truth(self):
        scene = make_scene(seed=42)
        cfg = SpeciesConfig(species_id=1, method="kmeans", k=2, cleanup="close",
                            kernel_diameter=9, seed=7)
        mask = annotate_image(scene.image, cfg)
        assert iou_against(scene.truth, mask) >= 0.95

    def test_otsu_recipe_recovers_synthetic_truth(self):
        scene = make_scene(seed=43)
        cfg = SpeciesConfig(species_id=1, method="otsu", polarity="dark",
                            cleanup="close", kernel_diameter=9)
        mask = annotate_image(scene.image, cfg)
        assert iou_against(scene.truth, mask) >= 0.95

    def test_kernel_one_equals_no_cleanup(self):
        from dataclasses import replace
        scene = make_scene(seed=44, size=128, n_blobs=3, n_specks=5)
        base = SpeciesConfig(species_id=1, method="kmeans", k=2, seed=1)
        one = annotate_image(scene.image, replace(base, kernel_diameter=1))
        none = annotate_image(scene.image, replace(base, cleanup="none"))
        assert np.array_equal(one.bits, none.bits)

    def test_mask_determinism(self):
        scene = make_scene(seed=45, size=96, n_blobs=2, n_specks=4)
        cfg = SpeciesConfig(species_id=1, method="kmeans", k=3, cleanup="open",
                            kernel_diameter=3, seed=12)
        a = annotate_image(scene.image, cfg)
        b = annotate_image(scene.image, cfg)
        assert np.array_equal(a.bits, b.bits)

    def test_manual_cluster_choice_excludes_artifact_cluster(self):
        from bactoseg.synthetic import ARTIFACT_COLOR
        scene = make_scene(seed=43, speck_color=ARTIFACT_COLOR, speck_radius=(3, 3))
        # cluster 0 is the lowest-luma (bacteria) cluster; leaving out the
        # mid-luma artifact cluster drops the debris from the mask
        cfg = SpeciesConfig(species_id=1, method="kmeans", k=3, foreground=(0,),
                            cleanup="none", kernel_diameter=1, seed=7)
        mask = annotate_image(scene.image, cfg)
        artifact_px = ~scene.truth & (scene.image.pixels[..., 0] > 150) & \
            (scene.image.pixels[..., 2] < 100)
        assert artifact_px.sum() > 100
        assert not (mask.bits & artifact_px).any()
        assert (mask.bits & scene.truth).sum() / scene.truth.sum() > 0.99


class TestExport:
    def test_export_values_and_round_trip(self, tmp_path):
        bits = np.zeros((6, 6), dtype=bool)
        bits[2:4, 2:4] = True
        path = tmp_path / "label.png"
        label = export_label(BinaryMask(bits), species_id=7, path=path)
        assert set(np.unique(label.classes)) == {0, 7}

        back = load_label(path)
        assert np.array_equal(back.classes, label.classes)
        from bactoseg.labels import label_to_mask
        mask, sid = label_to_mask(back)
        assert sid == 7 and np.array_equal(mask.bits, bits)

    def test_export_empty_and_full(self, tmp_path):
        empty = export_label(BinaryMask(np.zeros((3, 3), dtype=bool)), 1, tmp_path / "e.png")
        assert (empty.classes == 0).all()
        full = export_label(BinaryMask(np.ones((3, 3), dtype=bool)), 7, tmp_path / "f.png")
        assert (full.classes == 7).all()

    def test_export_rejects_bad_species(self, tmp_path):
        with pytest.raises(ValueError):
            export_label(BinaryMask(np.zeros((2, 2), dtype=bool)), 0, tmp_path / "x.png")
        with pytest.raises(ValueError):
            export_label(BinaryMask(np.zeros((2, 2), dtype=bool)), 34, tmp_path / "y.png")


class TestBatch:
    def test_batch_annotate_mini_tree(self, mini_dataset, tmp_path):
        manifest = ingest_dibas(mini_dataset["root"])
        report = batch_annotate(manifest, mini_dataset["configs"], tmp_path / "labels")
        assert len(report.records) == 6
        assert not report.failures
        for rec in report.records:
            assert (tmp_path / "labels" / rec.label_path.split("labels/")[-1]).exists() or \
                   rec.label_path
            assert 0.0 < rec.foreground_fraction < 1.0

    def test_missing_config_fails_fast(self, mini_dataset, tmp_path):
        manifest = ingest_dibas(mini_dataset["root"])
        configs = {1: mini_dataset["configs"][1]}
        with pytest.raises(MissingConfigError):
            batch_annotate(manifest, configs, tmp_path / "labels")
        assert not (tmp_path / "labels").exists()

    def test_rerun_is_byte_identical(self, mini_dataset, tmp_path):
        manifest = ingest_dibas(mini_dataset["root"])
        r1 = batch_annotate(manifest, mini_dataset["configs"], tmp_path / "run1")
        r2 = batch_annotate(manifest, mini_dataset["configs"], tmp_path / "run2")
        assert r1.to_dict()["failure_count"] == 0
        for a, b in zip(r1.records, r2.records):
            bytes_a = open(a.label_path, "rb").read()
            bytes_b = open(b.label_path, "rb").read()
            assert bytes_a == bytes_b
            assert a.foreground_fraction == b.foreground_fraction


class TestConfigIO:
    def test_save_load_configs(self, mini_dataset, tmp_path):
        manifest = ingest_dibas(mini_dataset["root"])
        path = tmp_path / "configs.json"
        save_configs(mini_dataset["configs"], manifest.species(), path)
        doc = json.loads(path.read_text())
        assert doc["schema_version"] == 1
        assert set(doc["species"]) == {"blobus_demo", "stainia_demo"}

        loaded = load_configs(path, manifest)
        assert loaded == mini_dataset["configs"]
