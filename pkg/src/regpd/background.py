"""Boundary-prior background model used to simulate region exclusion."""

from dataclasses import dataclass

import numpy as np

from .imagery import RasterImage
from .segmentation import boundary_regions, segment

DEFAULT_BANDWIDTH = 25.0
DEFAULT_SIGMA2 = 10.0
DEFAULT_BG_SCALE = 256
SHIFT_TOL = 0.1
MAX_SHIFT_ITER = 100


@dataclass(frozen=True)
class BackgroundModel:
    """Isotropic normal over RGB: mean ``mu`` and per-channel variance ``sigma2``."""

    mu: np.ndarray
    sigma2: float = DEFAULT_SIGMA2

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float32).reshape(3)
        if np.any(mu < 0) or np.any(mu > 255):
            raise ValueError("background mean must lie in [0, 255]")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", float(self.sigma2))


@dataclass(frozen=True)
class ClusterResult:
    modes: np.ndarray
    assignments: np.ndarray
    largest_mode: np.ndarray


def region_mean_colors(image, seg, regions):
    """Mean RGB of each listed region, ordered by ascending region id."""
    regions = sorted(int(r) for r in regions)
    if not regions:
        raise ValueError("empty region set")
    if regions[0] < 0 or regions[-1] >= seg.region_count:
        raise ValueError("region id out of range")
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    flat = seg.labels.ravel()
    counts = np.bincount(flat, minlength=seg.region_count)
    means = np.empty((len(regions), 3))
    for c in range(3):
        sums = np.bincount(flat, weights=pixels[..., c].ravel().astype(np.float64),
                           minlength=seg.region_count)
        means[:, c] = sums[regions] / counts[regions]
    return means


def flat_kernel_step(x, points, bandwidth):
    """One flat-kernel mean-shift update of each row of ``x``."""
    d2 = ((x[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1)
    inside = d2 <= bandwidth * bandwidth
    counts = inside.sum(axis=1)
    moved = inside.astype(np.float64) @ points
    out = x.copy()
    has = counts > 0
    out[has] = moved[has] / counts[has, None]
    return out


def mean_shift(points, bandwidth=DEFAULT_BANDWIDTH):
    """Flat-kernel mean shift; returns modes, assignments and the largest mode.

    Every point climbs until it moves less than 0.1 (or 100 steps). Converged
    positions closer than ``bandwidth / 2`` to an earlier mode join it. The
    largest mode is the one with most members, ties going to the earlier one.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise ValueError("mean_shift needs at least one point")
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    x = points.copy()
    active = np.ones(len(x), dtype=bool)
    for _ in range(MAX_SHIFT_ITER):
        if not active.any():
            break
        nxt = flat_kernel_step(x[active], points, bandwidth)
        shift = np.linalg.norm(nxt - x[active], axis=1)
        x[active] = nxt
        idx = np.flatnonzero(active)
        active[idx[shift < SHIFT_TOL]] = False

    modes = []
    assignments = np.empty(len(x), dtype=np.int64)
    for i, p in enumerate(x):
        for m, mode in enumerate(modes):
            if np.linalg.norm(p - mode) < bandwidth / 2:
                assignments[i] = m
                break
        else:
            assignments[i] = len(modes)
            modes.append(p)
    modes = np.array(modes)
    counts = np.bincount(assignments, minlength=len(modes))
    largest = modes[int(np.argmax(counts))]
    return ClusterResult(modes, assignments, largest)


def estimate_background(image, seed=0, *, bandwidth=DEFAULT_BANDWIDTH, sigma2=DEFAULT_SIGMA2,
                        bg_scale=DEFAULT_BG_SCALE, **seg_kwargs):
    """Fit the background normal from boundary superpixels at scale ``bg_scale``.

    Images with fewer pixels than ``bg_scale`` are segmented one region per pixel.
    """
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    target = min(bg_scale, pixels.shape[0] * pixels.shape[1])
    seg = segment(image, target, seed, **seg_kwargs)
    means = region_mean_colors(image, seg, boundary_regions(seg))
    mu = mean_shift(means, bandwidth).largest_mode
    return BackgroundModel(np.clip(mu, 0.0, 255.0), sigma2)


def region_rng(seed, scale, region):
    """Independent generator for one (seed, scale, region) triple."""
    return np.random.default_rng([int(seed), int(scale), int(region)])


def sample_exclusion(image, seg, region, model, rng):
    """Copy of ``image`` with ``region`` resampled from the background model.

    Each channel of each region pixel is drawn independently and clamped to
    [0, 255]. Pixels outside the region are copied bit-exactly.
    """
    if not 0 <= region < seg.region_count:
        raise ValueError(f"region id {region} out of range [0, {seg.region_count})")
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    out = np.array(pixels, dtype=np.float32, copy=True)
    mask = seg.labels == region
    n = int(mask.sum())
    draws = rng.normal(model.mu.astype(np.float64), np.sqrt(model.sigma2), size=(n, 3))
    out[mask] = np.clip(draws, 0.0, 255.0)
    return RasterImage(out)
