"""Pixel-level segmentation scores: confusion counting, the five standard
metrics (accuracy, precision, recall, F1, IoU), macro averages, and
tabular report emission.

All 0/0 cases return 0 by convention so macro averages stay defined.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionMismatchError, EmptyCountsError, EmptyRowSetError
from .labels import LabelMap

SCORE_FIELDS = ("precision", "recall", "f1", "iou", "accuracy")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsRow:
    class_name: str
    precision: float
    recall: float
    f1: float
    iou: float
    accuracy: float


def confusion(pred: LabelMap, gt: LabelMap, cls: int) -> ConfusionCounts:
    """One-vs-rest confusion for class `cls` over two label maps."""
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise DimensionMismatchError(
            f"pred {pred.width}x{pred.height} vs gt {gt.width}x{gt.height}")
    p = pred.classes == cls
    g = gt.classes == cls
    tp = int((p & g).sum())
    fp = int((p & ~g).sum())
    fn = int((~p & g).sum())
    tn = int((~p & ~g).sum())
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def accuracy(c: ConfusionCounts) -> float:
    if c.total == 0:
        raise EmptyCountsError("no evaluated pixels")
    return (c.tp + c.tn) / c.total


def precision(c: ConfusionCounts) -> float:
    denom = c.tp + c.fp
    return c.tp / denom if denom else 0.0


def recall(c: ConfusionCounts) -> float:
    denom = c.tp + c.fn
    return c.tp / denom if denom else 0.0


def f1(c: ConfusionCounts) -> float:
    p, r = precision(c), recall(c)
    return 2 * p * r / (p + r) if p + r else 0.0


def iou(c: ConfusionCounts) -> float:
    denom = c.tp + c.fp + c.fn
    return c.tp / denom if denom else 0.0


def row_from_counts(class_name: str, c: ConfusionCounts) -> MetricsRow:
    return MetricsRow(class_name=class_name, precision=precision(c), recall=recall(c),
                      f1=f1(c), iou=iou(c), accuracy=accuracy(c))


def macro_average(rows: list[MetricsRow], class_name: str = "average") -> MetricsRow:
    """Unweighted mean of every score column."""
    if not rows:
        raise EmptyRowSetError("cannot average zero rows")
    n = len(rows)
    means = {f: sum(getattr(r, f) for r in rows) / n for f in SCORE_FIELDS}
    return MetricsRow(class_name=class_name, **means)


def table_report(rows: list[MetricsRow], format: str = "csv") -> str:
    """One line per class, two-decimal fixed formatting, macro-average last."""
    all_rows = list(rows)
    if all_rows:
        all_rows.append(macro_average(rows))
    if format == "csv":
        lines = ["class,precision,recall,f1,iou,accuracy"]
        for r in all_rows:
            scores = ",".join(f"{getattr(r, f):.2f}" for f in SCORE_FIELDS)
            lines.append(f"{r.class_name},{scores}")
    elif format == "markdown":
        lines = ["| class | precision | recall | f1 | iou | accuracy |",
                 "| --- | --- | --- | --- | --- | --- |"]
        for r in all_rows:
            scores = " | ".join(f"{getattr(r, f):.2f}" for f in SCORE_FIELDS)
            lines.append(f"| {r.class_name} | {scores} |")
    else:
        raise ValueError(f"unknown format {format!r}")
    return "\n".join(lines) + "\n"
