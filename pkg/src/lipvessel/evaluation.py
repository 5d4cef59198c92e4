"""
Pixel-wise comparison of vessel masks with expert references.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Optional

import numpy as np

CSV_COLUMNS = ("image_id", "tp", "tn", "fp", "fn", "se", "sp", "acc")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class MetricsRecord:
    image_id: str
    se: Optional[float]
    sp: Optional[float]
    acc: float
    counts: Optional[ConfusionCounts] = None


@dataclass(frozen=True)
class Summary:
    se: Optional[float]
    sp: Optional[float]
    acc: float
    acc_std: float
    n: int

    def line(self) -> str:
        def fmt(v):
            return "-" if v is None else f"{v:.4f}"
        return f"Se {fmt(self.se)}  Sp {fmt(self.sp)}  Acc {self.acc:.4f} ({self.acc_std:.4f})  n={self.n}"


def confusion(pred, ref, fov=None) -> ConfusionCounts:
    """Count agreement between ``pred`` and ``ref`` over the FOV pixels.

    With ``fov=None`` the whole frame is evaluated.
    """
    pred = np.asarray(pred, dtype=bool)
    ref = np.asarray(ref, dtype=bool)
    fov = np.ones(pred.shape, dtype=bool) if fov is None else np.asarray(fov, dtype=bool)
    if not (pred.shape == ref.shape == fov.shape):
        raise ValueError(f"mask shapes differ: pred {pred.shape}, ref {ref.shape}, fov {fov.shape}")
    p, r = pred[fov], ref[fov]
    tp = int(np.count_nonzero(p & r))
    fp = int(np.count_nonzero(p & ~r))
    fn = int(np.count_nonzero(~p & r))
    tn = int(p.size - tp - fp - fn)
    return ConfusionCounts(tp, tn, fp, fn)


def metrics(c: ConfusionCounts, image_id: str = "") -> MetricsRecord:
    """Sensitivity, specificity and accuracy; a rate with an empty denominator is None."""
    if c.total == 0:
        raise ValueError("no evaluated pixel")
    se = c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    sp = c.tn / (c.tn + c.fp) if c.tn + c.fp else None
    return MetricsRecord(image_id, se, sp, (c.tp + c.tn) / c.total, c)


def aggregate(records) -> Summary:
    """Unweighted means over images and the sample std (n - 1) of accuracy.

    A single record has std 0.
    """
    records = list(records)
    if not records:
        raise ValueError("nothing to aggregate")

    def mean(vals):
        vals = [v for v in vals if v is not None]
        return statistics.fmean(vals) if vals else None

    accs = [r.acc for r in records]
    std = statistics.stdev(accs) if len(accs) > 1 else 0.0
    return Summary(mean(r.se for r in records), mean(r.sp for r in records),
                   statistics.fmean(accs), std, len(records))


def _fmt(v):
    return "" if v is None else f"{v:.6f}"


def write_csv(path, records) -> Summary:
    """Write per-image rows, then a ``mean`` row and a ``std`` row.

    The ``mean`` row sums the counts and averages the rates; the ``std``
    row holds the sample standard deviation of the accuracy only.
    """
    records = list(records)
    summary = aggregate(records)
    total = ConfusionCounts(0, 0, 0, 0)
    for r in records:
        if r.counts is not None:
            total = total + r.counts
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            c = r.counts or ConfusionCounts(0, 0, 0, 0)
            w.writerow([r.image_id, c.tp, c.tn, c.fp, c.fn, _fmt(r.se), _fmt(r.sp), _fmt(r.acc)])
        w.writerow(["mean", total.tp, total.tn, total.fp, total.fn,
                    _fmt(summary.se), _fmt(summary.sp), _fmt(summary.acc)])
        w.writerow(["std", "", "", "", "", "", "", _fmt(summary.acc_std)])
    return summary
