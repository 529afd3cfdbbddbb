#!/usr/bin/env python3
"""Generate a synthetic mini-dataset tree (plus ground-truth labels and a
config file) for demos and manual testing of the CLI / review service."""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bactoseg.pipeline import SpeciesConfig, ingest_dibas, save_configs
from bactoseg.synthetic import write_mini_dataset


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="dataset root to create")
    ap.add_argument("--species", type=int, default=2)
    ap.add_argument("--images", type=int, default=5)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    names = tuple(f"species_{chr(ord('a') + i)}" for i in range(args.species))
    root = Path(args.out)
    write_mini_dataset(root, species=names, images_per_species=args.images,
                       size=args.size, seed=args.seed)
    manifest = ingest_dibas(root)

    configs = {}
    for sid in manifest.species():
        if sid % 2 == 1:
            configs[sid] = SpeciesConfig(species_id=sid, method="kmeans", k=2,
                                         cleanup="close", kernel_diameter=5, seed=args.seed)
        else:
            configs[sid] = SpeciesConfig(species_id=sid, method="otsu", polarity="dark",
                                         cleanup="close", kernel_diameter=5, seed=args.seed)
    cfg_path = root.parent / "configs.json"
    save_configs(configs, manifest.species(), cfg_path)

    print(f"dataset: {root}")
    print(f"ground truth: {root.parent / (root.name + '_truth')}")
    print(f"configs: {cfg_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
