"""Superpixel segmentation with a controllable region count.

A SLIC-style clusterer seeded on a regular grid, followed by a cleanup pass
that makes every region 4-connected and keeps the achieved region count in
``[target, 2 * target]``.
"""

import heapq
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SegmentationError
from .imagery import RasterImage

DEFAULT_COMPACTNESS = 10.0
DEFAULT_ITERATIONS = 10
SEED_JITTER = 0.1


@dataclass(frozen=True)
class SegmentationMap:
    """Dense 0-based per-pixel region labels."""

    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels):
        labels = _kernels.canonical_relabel(np.asarray(labels))
        return cls(labels, int(labels.max()) + 1)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    def sizes(self):
        return np.bincount(self.labels.ravel(), minlength=self.region_count)

    def mask(self, region):
        return self.labels == region


@dataclass(frozen=True)
class ScaleLadder:
    """Region-count targets 2, 4, ..., 2**r."""

    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("scale count r must be >= 1")

    @property
    def target_counts(self):
        return [2 ** j for j in range(1, self.r + 1)]


def grid_shape(k, height, width):
    """Rows x cols grid holding the initial cluster centres.

    Uses an exact factorisation of ``k`` when one gives cells no more than
    2:1 in aspect; otherwise a near-square grid with at least ``k`` cells.
    """
    best = None
    for rows in range(1, k + 1):
        if k % rows:
            continue
        cols = k // rows
        if rows > height or cols > width:
            continue
        skew = abs(math.log((height / rows) / (width / cols)))
        if best is None or skew < best[0] - 1e-12:
            best = (skew, rows, cols)
    if best is not None and best[0] <= math.log(2.0) + 1e-9:
        return best[1], best[2]
    rows = min(height, max(1, round(math.sqrt(k * height / width))))
    cols = min(width, math.ceil(k / rows))
    return rows, cols


def to_lab(pixels):
    """sRGB on [0, 255] to CIELAB (D65)."""
    rgb = np.asarray(pixels, dtype=np.float64) / 255.0
    linear = np.where(rgb > 0.04045, ((rgb + 0.055) / 1.055) ** 2.4, rgb / 12.92)
    m = np.array([[0.412453, 0.357580, 0.180423],
                  [0.212671, 0.715160, 0.072169],
                  [0.019334, 0.119193, 0.950227]])
    xyz = linear @ m.T / np.array([0.950456, 1.0, 1.088754])
    f = np.where(xyz > 0.008856, np.cbrt(xyz), 7.787 * xyz + 16.0 / 116.0)
    L = np.where(xyz[..., 1] > 0.008856, 116.0 * f[..., 1] - 16.0, 903.3 * xyz[..., 1])
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def slic_labels(features, k, compactness=DEFAULT_COMPACTNESS, iterations=DEFAULT_ITERATIONS,
                seed=0):
    """Raw k-means superpixel labels; regions may be fragmented.

    Grid seeds are jittered by up to 10% of a cell, drawn from ``seed``, so
    that mirror-symmetric scenes do not lock the clusters into symmetric
    mixed regions.
    """
    height, width = features.shape[:2]
    rows, cols = grid_shape(k, height, width)
    cell_h, cell_w = height / rows, width / cols
    yy, xx = np.meshgrid((np.arange(rows) + 0.5) * cell_h - 0.5,
                         (np.arange(cols) + 0.5) * cell_w - 0.5, indexing="ij")
    centers = np.empty((rows * cols, 5))
    centers[:, 0] = yy.ravel()
    centers[:, 1] = xx.ravel()
    rng = np.random.default_rng([seed, k])
    centers[:, 0] += rng.uniform(-SEED_JITTER, SEED_JITTER, len(centers)) * cell_h
    centers[:, 1] += rng.uniform(-SEED_JITTER, SEED_JITTER, len(centers)) * cell_w
    iy = np.clip(np.rint(centers[:, 0]).astype(int), 0, height - 1)
    ix = np.clip(np.rint(centers[:, 1]).astype(int), 0, width - 1)
    centers[:, 2:] = features[iy, ix]

    step = math.sqrt(height * width / k)
    weight = (compactness / step) ** 2
    labels = np.empty((height, width), dtype=np.int64)
    dist = np.empty((height, width))
    ys, xs = np.indices((height, width))
    for _ in range(iterations):
        labels.fill(-1)
        dist.fill(np.inf)
        _kernels.slic_assign(features, centers, cell_h, cell_w, weight, labels, dist)
        _assign_orphans(labels, centers)
        flat = labels.ravel()
        counts = np.bincount(flat, minlength=len(centers))
        live = counts > 0
        for col, values in enumerate((ys, xs, features[..., 0], features[..., 1], features[..., 2])):
            sums = np.bincount(flat, weights=values.ravel(), minlength=len(centers))
            centers[live, col] = sums[live] / counts[live]
    return labels


def _assign_orphans(labels, centers):
    orphan = labels < 0
    if not orphan.any():
        return
    oy, ox = np.nonzero(orphan)
    d = (oy[:, None] - centers[None, :, 0]) ** 2 + (ox[:, None] - centers[None, :, 1]) ** 2
    labels[oy, ox] = np.argmin(d, axis=1)


def _adjacency(labels, n):
    pairs = []
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        diff = a != b
        pairs.append(np.stack([a[diff], b[diff]], axis=1))
    pairs = np.concatenate(pairs)
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    adj = [set() for _ in range(n)]
    for a, b in pairs:
        adj[a].add(int(b))
        adj[b].add(int(a))
    return adj


def _merge_regions(labels, min_size, max_count):
    """Merge regions into their largest neighbour.

    Regions smaller than ``min_size`` are absorbed smallest-first; afterwards
    the smallest regions keep being absorbed while more than ``max_count``
    remain. Merging two adjacent connected regions keeps them connected.
    """
    n = int(labels.max()) + 1
    sizes = np.bincount(labels.ravel(), minlength=n).tolist()
    adj = _adjacency(labels, n)
    parent = list(range(n))
    alive = n
    heap = [(sizes[i], i) for i in range(n)]
    heapq.heapify(heap)
    while heap and alive > 1:
        size, region = heapq.heappop(heap)
        if parent[region] != region or size != sizes[region]:
            continue
        if size >= min_size and alive <= max_count:
            break
        if not adj[region]:
            continue
        target = max(adj[region], key=lambda j: (sizes[j], -j))
        parent[region] = target
        sizes[target] += sizes[region]
        for other in adj[region]:
            adj[other].discard(region)
            if other != target:
                adj[other].add(target)
                adj[target].add(other)
        adj[region] = set()
        alive -= 1
        heapq.heappush(heap, (sizes[target], target))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    return roots[labels]


def _split_largest(labels):
    sizes = np.bincount(labels.ravel())
    region = int(np.argmax(sizes))
    ys, xs = np.nonzero(labels == region)
    if np.ptp(ys) >= np.ptp(xs):
        order = np.lexsort((xs, ys))
    else:
        order = np.lexsort((ys, xs))
    half = order[len(order) // 2:]
    out = labels.copy()
    out[ys[half], xs[half]] = labels.max() + 1
    return out


def enforce_regions(labels, target):
    """Make regions connected and bring the count into [target, 2*target]."""
    height, width = labels.shape
    comp, n = _kernels.components(labels)
    comp = _merge_regions(comp, (height * width) / (4.0 * target), 2 * target)
    comp, n = _kernels.components(comp)
    while n < target:
        comp, n = _kernels.components(_split_largest(comp))
    if n > 2 * target:
        comp = _merge_regions(comp, 0, 2 * target)
    return _kernels.canonical_relabel(comp)


def _features(image, colorspace):
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    if colorspace == "rgb":
        return np.ascontiguousarray(pixels, dtype=np.float64)
    if colorspace == "lab":
        return np.ascontiguousarray(to_lab(pixels))
    raise ValueError(f"unknown colorspace {colorspace!r}")


def segment(image, target_regions, seed=0, *, compactness=DEFAULT_COMPACTNESS,
            iterations=DEFAULT_ITERATIONS, colorspace="rgb"):
    """Partition ``image`` into roughly ``target_regions`` connected superpixels.

    Deterministic for a fixed ``(image, target_regions, seed)``; the seed
    only perturbs the initial cluster centres.
    """
    features = _features(image, colorspace)
    height, width = features.shape[:2]
    if target_regions < 1:
        raise SegmentationError("target_regions must be >= 1")
    if target_regions > height * width:
        raise SegmentationError(
            f"target_regions={target_regions} exceeds the pixel count {height * width}"
        )
    if target_regions == 1:
        return SegmentationMap(np.zeros((height, width), dtype=np.int64), 1)
    raw = slic_labels(features, target_regions, compactness, iterations, seed)
    return SegmentationMap.from_labels(enforce_regions(raw, target_regions))


def segment_ladder(image, ladder, seed=0, **kwargs):
    if isinstance(ladder, int):
        ladder = ScaleLadder(ladder)
    return [segment(image, k, seed, **kwargs) for k in ladder.target_counts]


def boundary_regions(seg):
    """Ids of regions touching the outermost row/column ring."""
    labels = seg.labels
    ring = np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])
    return frozenset(int(v) for v in np.unique(ring))


def boundary_overlay(image, seg, color=(255, 255, 0)):
    """uint8 RGB copy of ``image`` with region borders painted in ``color``."""
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    labels = seg.labels
    edge = np.zeros(labels.shape, dtype=bool)
    edge[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    edge[:-1, :] |= labels[:-1, :] != labels[1:, :]
    out = np.clip(np.rint(pixels), 0, 255).astype(np.uint8)
    out[edge] = color
    return out
