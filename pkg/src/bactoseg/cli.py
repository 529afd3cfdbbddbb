"""Command-line entry points: annotate, split, evaluate, patch, serve."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics
from .imaging import load_image, save_png
from .labels import load_label, save_label
from .patching import augment, extract_patches
from .pipeline import (DEFAULT_RATIOS, DatasetManifest, batch_annotate, ingest_dibas,
                       load_configs, split_dataset)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bactoseg",
                                     description="Semi-automatic bacterial micrograph labeling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="batch-annotate a dataset tree")
    p.add_argument("--root", required=True, help="dataset root (one directory per species)")
    p.add_argument("--config", required=True, help="species config JSON")
    p.add_argument("--out", required=True, help="output directory for label PNGs")
    p.add_argument("--species", help="restrict to one species directory name")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("split", help="assign train/val/test splits")
    p.add_argument("--root", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", type=float, nargs=3, default=list(DEFAULT_RATIOS),
                   metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--out", required=True, help="manifest JSON path")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="score predicted label maps against ground truth")
    p.add_argument("--pred", required=True, help="directory of predicted label PNGs")
    p.add_argument("--gt", required=True, help="directory of ground-truth label PNGs")
    p.add_argument("--out", required=True, help="CSV report path")
    p.add_argument("--root", help="optional dataset root, used to name classes")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("patch", help="extract training/validation patches")
    p.add_argument("--manifest", required=True, help="manifest JSON from `split`")
    p.add_argument("--labels", required=True, help="directory of label PNGs")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--train-stride", type=int, default=256)
    p.add_argument("--out", required=True)
    p.add_argument("--augment-per-patch", type=int, default=0,
                   help="extra augmented copies of each train patch")
    p.add_argument("--aug-seed", type=int, default=0)
    p.add_argument("--max-shift", type=int, default=64)
    p.set_defaults(func=cmd_patch)

    p = sub.add_parser("serve", help="run the local review service")
    p.add_argument("--root", required=True)
    p.add_argument("--state", required=True, help="session state JSON path")
    p.add_argument("--port", type=int, default=None,
                   help="default 8000, or $BACTOSEG_PORT when set")
    p.add_argument("--labels-dir", default=None)
    p.add_argument("--static-dir", default=None, help="directory of UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def cmd_annotate(args) -> int:
    manifest = ingest_dibas(args.root)
    if args.species:
        entries = [e for e in manifest.entries if e.species_name == args.species]
        if not entries:
            print(f"no species directory named {args.species!r}", file=sys.stderr)
            return 2
        manifest = DatasetManifest(root=manifest.root, entries=entries,
                                   warnings=manifest.warnings)
    configs = load_configs(args.config, manifest)
    report = batch_annotate(manifest, configs, args.out)
    report.save(Path(args.out) / "report.json")
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"annotated {len(report.records) - len(report.failures)}/{len(report.records)} "
          f"images -> {args.out}")
    return 1 if report.failures else 0


def cmd_split(args) -> int:
    manifest = ingest_dibas(args.root)
    manifest = split_dataset(manifest, ratios=tuple(args.ratios), seed=args.seed)
    manifest.save(args.out)
    counts = {s: sum(1 for e in manifest.entries if e.split == s)
              for s in ("train", "val", "test")}
    print(f"wrote {args.out}: {counts['train']} train / {counts['val']} val / "
          f"{counts['test']} test")
    return 0


def cmd_evaluate(args) -> int:
    pred_dir, gt_dir = Path(args.pred), Path(args.gt)
    gt_files = sorted(p for p in gt_dir.rglob("*.png"))
    if not gt_files:
        print(f"no ground-truth PNGs under {gt_dir}", file=sys.stderr)
        return 2

    class_names = {}
    if args.root:
        class_names = ingest_dibas(args.root).species()

    # accumulate one-vs-rest counts per class over all paired images
    totals: dict[int, list[int]] = {}
    paired = 0
    for gt_path in gt_files:
        rel = gt_path.relative_to(gt_dir)
        pred_path = pred_dir / rel
        if not pred_path.exists():
            print(f"warning: no prediction for {rel}", file=sys.stderr)
            continue
        gt = load_label(gt_path)
        pred = load_label(pred_path)
        paired += 1
        present = sorted(set(gt.classes.ravel()) | set(pred.classes.ravel()))
        for cls in present:
            if cls == 0:
                continue
            c = metrics.confusion(pred, gt, int(cls))
            acc = totals.setdefault(int(cls), [0, 0, 0, 0])
            acc[0] += c.tp
            acc[1] += c.tn
            acc[2] += c.fp
            acc[3] += c.fn

    rows = []
    for cls in sorted(totals):
        tp, tn, fp, fn = totals[cls]
        counts = metrics.ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)
        name = class_names.get(cls, f"class_{cls:02d}")
        rows.append(metrics.row_from_counts(name, counts))
    Path(args.out).write_text(metrics.table_report(rows, format="csv"))
    print(f"evaluated {paired} image pairs, {len(rows)} classes -> {args.out}")
    return 0


def cmd_patch(args) -> int:
    manifest = DatasetManifest.load(args.manifest)
    labels_dir = Path(args.labels)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    index = []
    for entry in manifest.entries:
        stem = Path(entry.image_path).stem
        label_path = labels_dir / entry.species_name / f"{stem}.png"
        if not label_path.exists():
            print(f"warning: no label for {entry.image_path}", file=sys.stderr)
            continue
        img = load_image(Path(manifest.root) / entry.image_path)
        label = load_label(label_path)
        stride = args.train_stride if entry.split == "train" else args.size
        patch_set = extract_patches(img, label, size=args.size, stride=stride)

        pdir = out_dir / entry.species_name / stem
        pdir.mkdir(parents=True, exist_ok=True)
        for i, patch in enumerate(patch_set.patches):
            variants = [patch]
            if entry.split == "train" and args.augment_per_patch > 0:
                for j in range(args.augment_per_patch):
                    variants.append(augment(
                        patch,
                        [{"op": "rot90"}, {"op": "shift", "max_shift": args.max_shift}],
                        seed=args.aug_seed + 7919 * i + j))
            for v_idx, v in enumerate(variants):
                base = f"p{i:03d}_{patch.x}_{patch.y}" + (f"_a{v_idx}" if v_idx else "")
                save_png(v.image, pdir / f"{base}.png")
                save_label(v.label, pdir / f"{base}_label.png")
                index.append({"image": str(pdir / f"{base}.png"),
                              "label": str(pdir / f"{base}_label.png"),
                              "source": entry.image_path, "split": entry.split,
                              "origin": [patch.x, patch.y],
                              "augmentations": list(v.augmentations)})
    (out_dir / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    print(f"wrote {len(index)} patches -> {out_dir}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(args.root, args.state, port=args.port, labels_dir=args.labels_dir,
          static_dir=args.static_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
