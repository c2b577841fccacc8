"""Threshold-swept precision / recall / F-measure against ground-truth masks."""

import csv
from dataclasses import dataclass

import numpy as np

from .imagery import BinaryMask, SaliencyMap, normalize

CSV_HEADER = ("threshold", "precision", "recall", "f_measure")
# Maps are float32 and thresholds are computed quotients; without slack a value
# sitting exactly on a threshold flips under harmless affine rescaling. The slack
# is relative so a zero threshold stays exact and constant maps stay empty above it.
THRESHOLD_SLACK = 1e-6


@dataclass(frozen=True)
class PRCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f_measure: np.ndarray

    def at(self, threshold):
        """Row nearest to ``threshold`` as ``(precision, recall, f_measure)``."""
        i = int(np.argmin(np.abs(self.thresholds - threshold)))
        return self.precision[i], self.recall[i], self.f_measure[i]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for row in zip(self.thresholds, self.precision, self.recall, self.f_measure):
                writer.writerow([f"{v:.6f}" for v in row])


def binarize(smap, threshold):
    """Min-max normalise then keep pixels >= ``threshold``.

    Constant maps normalise to all zeros, so they select everything at
    threshold 0 and nothing above it. Comparison allows a relative
    ``THRESHOLD_SLACK`` of rounding.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    values = smap.values if isinstance(smap, SaliencyMap) else np.asarray(smap)
    return BinaryMask(normalize(values) >= threshold * (1.0 - THRESHOLD_SLACK))


def confusion(mask, truth):
    m = mask.values if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    t = truth.values if isinstance(truth, BinaryMask) else np.asarray(truth, dtype=bool)
    if m.shape != t.shape:
        raise ValueError(f"mask shape {m.shape} does not match truth shape {t.shape}")
    tp = int(np.count_nonzero(m & t))
    fp = int(np.count_nonzero(m & ~t))
    fn = int(np.count_nonzero(~m & t))
    tn = int(np.count_nonzero(~m & ~t))
    return tp, fp, fn, tn


def f_score(precision, recall, beta=1.0):
    b2 = beta * beta
    denom = b2 * precision + recall
    return 0.0 if denom == 0 else (1 + b2) * precision * recall / denom


def pr_at(mask, truth, beta=1.0):
    """``(precision, recall, f)``; empty denominators give precision 1 / recall 1."""
    tp, fp, fn, _ = confusion(mask, truth)
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return precision, recall, f_score(precision, recall, beta)


def thresholds(steps):
    if steps < 2:
        raise ValueError("need at least 2 threshold steps")
    return np.arange(steps) / (steps - 1)


def sweep(smap, truth, steps=101, beta=1.0):
    ts = thresholds(steps)
    rows = np.array([pr_at(binarize(smap, t), truth, beta) for t in ts])
    return PRCurve(ts, rows[:, 0], rows[:, 1], rows[:, 2])


def mean_curve(curves):
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to average")
    ts = curves[0].thresholds
    for c in curves[1:]:
        if not np.array_equal(c.thresholds, ts):
            raise ValueError("curves use different thresholds")
    return PRCurve(ts, *(np.mean([getattr(c, name) for c in curves], axis=0)
                         for name in ("precision", "recall", "f_measure")))
