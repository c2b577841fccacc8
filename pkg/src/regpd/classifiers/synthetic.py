"""Deterministic image "classifiers" with known causal structure.

They stand in for a real network when checking the explainers: the score of
a class is driven only by how many pixels carry a given colour.
"""

from dataclasses import dataclass

import numpy as np

from .base import ClassifierHandle, as_pixels


def color_fraction(pixels, color, tolerance):
    """Fraction of pixels within Euclidean ``tolerance`` of ``color``."""
    diff = pixels - np.asarray(color, dtype=np.float32)
    d2 = np.einsum("hwc,hwc->hw", diff, diff)
    return np.count_nonzero(d2 <= np.float32(tolerance) ** 2) / d2.size


@dataclass(frozen=True)
class Blob:
    color: tuple
    tolerance: float = 30.0
    reference_fraction: float = 0.1

    def score(self, pixels):
        frac = color_fraction(pixels, self.color, self.tolerance)
        return min(max(frac / self.reference_fraction, 0.0), 1.0)


class ConstantOracle(ClassifierHandle):
    backend = "synthetic"

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=np.float64)
        super().__init__(len(probs))
        self.probs = probs

    def _forward(self, image):
        return self.probs.copy()

    def describe(self):
        return "oracle:constant probs=" + ",".join(f"{p:g}" for p in self.probs)


class AreaFractionOracle(ClassifierHandle):
    """Two classes; class 1 scores the target-coloured area.

    ``p1 = clamp(fraction / reference_fraction, 0, 1)`` and ``p0 = 1 - p1``.
    """

    backend = "synthetic"

    def __init__(self, target_color=(255.0, 0.0, 0.0), tolerance=30.0, reference_fraction=0.1):
        super().__init__(2)
        self.blob = Blob(tuple(float(c) for c in target_color), float(tolerance),
                         float(reference_fraction))

    def _forward(self, image):
        p1 = self.blob.score(as_pixels(image))
        return np.array([1.0 - p1, p1])

    def describe(self):
        b = self.blob
        color = ",".join(f"{c:g}" for c in b.color)
        return (f"oracle:area-fraction color={color} tol={b.tolerance:g} "
                f"ref={b.reference_fraction:g}")


class TwoBlobOracle(ClassifierHandle):
    """Class 0 is "neither"; class ``i`` (1-based) follows blob ``i``.

    Each blob owns an independent share ``1 / len(blobs)`` of the probability
    mass, so removing one blob leaves the other classes' scores untouched.
    """

    backend = "synthetic"

    def __init__(self, blobs):
        blobs = [b if isinstance(b, Blob) else Blob(*b) for b in blobs]
        if not blobs:
            raise ValueError("need at least one blob")
        super().__init__(len(blobs) + 1)
        self.blobs = blobs

    def _forward(self, image):
        pixels = as_pixels(image)
        share = 1.0 / len(self.blobs)
        scores = [share * b.score(pixels) for b in self.blobs]
        return np.array([max(0.0, 1.0 - sum(scores))] + scores)

    def describe(self):
        parts = []
        for b in self.blobs:
            color = ",".join(f"{c:g}" for c in b.color)
            parts.append(f"{color}:{b.tolerance:g}:{b.reference_fraction:g}")
        return "oracle:two-blob blobs=" + ";".join(parts)
