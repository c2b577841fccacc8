"""Prediction-difference engines: tabular, pixel-wise and regional multi-scale."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import background as bg
from .difference import SUBTRACTION, DifferenceFunction
from .imagery import RasterImage, SaliencyMap
from .segmentation import DEFAULT_COMPACTNESS, ScaleLadder, segment

VARIANCE_FLOOR = 1.0


def resolve_class(probs, selector):
    """Class id from an explicit id or ``"argmax"`` (lowest index wins ties)."""
    if selector == "argmax":
        return int(np.argmax(probs))
    cls = int(selector)
    if not 0 <= cls < len(probs):
        raise ValueError(f"class {cls} out of range for {len(probs)} classes")
    return cls


def _as_raster(image):
    return image if isinstance(image, RasterImage) else RasterImage(image)


# --- tabular -----------------------------------------------------------------

@dataclass(frozen=True)
class TabularInstance:
    """A discrete feature vector with per-feature domains and priors."""

    values: tuple
    domains: tuple
    priors: tuple

    def __post_init__(self):
        values = tuple(self.values)
        domains = tuple(tuple(d) for d in self.domains)
        priors = tuple(np.asarray(p, dtype=np.float64) for p in self.priors)
        if not len(values) == len(domains) == len(priors):
            raise ValueError("values, domains and priors must have one entry per feature")
        for i, (v, dom, pri) in enumerate(zip(values, domains, priors)):
            if v not in dom:
                raise ValueError(f"feature {i} value {v!r} not in its domain {dom}")
            if len(pri) != len(dom):
                raise ValueError(f"feature {i}: {len(pri)} priors for {len(dom)} domain values")
            if abs(pri.sum() - 1.0) > 1e-9:
                raise ValueError(f"feature {i}: priors sum to {pri.sum()}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "priors", priors)

    def with_value(self, i, value):
        out = list(self.values)
        out[i] = value
        return tuple(out)


def tabular_marginals(f, x, cls):
    """Baseline score and prior-weighted marginal score for every feature."""
    base = f.predict(x.values)[cls]
    marginals = np.empty(len(x.values))
    for i, (dom, pri) in enumerate(zip(x.domains, x.priors)):
        marginals[i] = sum(p * f.predict(x.with_value(i, a))[cls] for a, p in zip(dom, pri))
    return base, marginals


def tabular_pd(f, x, cls, g=SUBTRACTION):
    """Saliency ``g(p(c|x), p(c|x without i))`` per feature.

    Removing a feature is simulated by averaging the classifier over that
    feature's domain weighted by its prior; this costs ``1 + sum(m_i)`` calls.
    """
    base, marginals = tabular_marginals(f, x, cls)
    return np.array([g(base, m) for m in marginals])


# --- pixel-wise --------------------------------------------------------------

@dataclass(frozen=True)
class BaselineConfig:
    k: int = 10
    l: int = 14
    samples: int = 10
    g: DifferenceFunction = SUBTRACTION
    seed: int = 0

    def __post_init__(self):
        if not self.l > self.k >= 1:
            raise ValueError(f"patch sizes need l > k >= 1, got k={self.k}, l={self.l}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


def _box_sums(values, half_before, size):
    """Per-pixel sums over a size x size window starting ``half_before`` above/left,
    clipped to the image. ``values`` is HxW[xC]."""
    height, width = values.shape[:2]
    sat = np.zeros((height + 1, width + 1) + values.shape[2:])
    sat[1:, 1:] = values.cumsum(0).cumsum(1)
    y0 = np.clip(np.arange(height) - half_before, 0, height)
    y1 = np.clip(np.arange(height) - half_before + size, 0, height)
    x0 = np.clip(np.arange(width) - half_before, 0, width)
    x1 = np.clip(np.arange(width) - half_before + size, 0, width)
    return (sat[y1][:, x1] - sat[y0][:, x1] - sat[y1][:, x0] + sat[y0][:, x0])


def ring_statistics(pixels, k, l):
    """Mean and variance of the l x l window minus the k x k patch, per pixel.

    Windows are clipped at the border. Variances below 1.0 are floored to
    1.0; pixels whose clipped ring is empty fall back to whole-image stats.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    ones = np.ones(pixels.shape[:2])
    count = _box_sums(ones, l // 2, l) - _box_sums(ones, k // 2, k)
    total = _box_sums(pixels, l // 2, l) - _box_sums(pixels, k // 2, k)
    sq = _box_sums(pixels ** 2, l // 2, l) - _box_sums(pixels ** 2, k // 2, k)
    empty = count < 0.5
    safe = np.where(empty, 1.0, count)[..., None]
    mean = total / safe
    var = np.maximum(sq / safe - mean ** 2, 0.0)
    if empty.any():
        mean[empty] = pixels.reshape(-1, 3).mean(axis=0)
        var[empty] = pixels.reshape(-1, 3).var(axis=0)
    return mean, np.maximum(var, VARIANCE_FLOOR)


def pixelwise_pd(f, image, cls, cfg=BaselineConfig()):
    """Conditional-sampling saliency over k x k patches centred on each pixel.

    Each patch is resampled ``cfg.samples`` times from a per-channel normal
    fitted to its surrounding ring; the mean score difference is spread over
    the patch and averaged per pixel. Costs ``1 + samples * H * W`` calls and
    returns a signed map.
    """
    image = _as_raster(image)
    pixels = image.pixels
    height, width = pixels.shape[:2]
    if height < cfg.l or width < cfg.l:
        raise ValueError(f"image {width}x{height} smaller than the outer patch {cfg.l}x{cfg.l}")
    probs = f.predict(pixels)
    cls = resolve_class(probs, cls)
    base = probs[cls]
    mean, var = ring_statistics(pixels, cfg.k, cfg.l)
    sd = np.sqrt(var)
    rng = np.random.default_rng(cfg.seed)
    work = np.array(pixels, copy=True)
    total = np.zeros((height, width))
    counts = np.zeros((height, width))
    hk = cfg.k // 2
    for y in range(height):
        y0, y1 = max(0, y - hk), min(height, y - hk + cfg.k)
        for x in range(width):
            x0, x1 = max(0, x - hk), min(width, x - hk + cfg.k)
            shape = (y1 - y0, x1 - x0, 3)
            acc = 0.0
            for _ in range(cfg.samples):
                draw = rng.normal(mean[y, x], sd[y, x], size=shape)
                work[y0:y1, x0:x1] = np.clip(draw, 0.0, 255.0)
                acc += f.predict(work)[cls]
            work[y0:y1, x0:x1] = pixels[y0:y1, x0:x1]
            total[y0:y1, x0:x1] += cfg.g(base, acc / cfg.samples)
            counts[y0:y1, x0:x1] += 1.0
    return SaliencyMap(total / counts, signed=True)


# --- regional multi-scale ----------------------------------------------------

@dataclass(frozen=True)
class PDConfig:
    r: int = 5
    g: DifferenceFunction = SUBTRACTION
    seed: int = 0
    bandwidth: float = bg.DEFAULT_BANDWIDTH
    sigma2: float = bg.DEFAULT_SIGMA2
    bg_scale: int = bg.DEFAULT_BG_SCALE
    compactness: float = DEFAULT_COMPACTNESS
    colorspace: str = "rgb"
    workers: int = 1

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("scale count r must be >= 1")

    @property
    def segment_kwargs(self):
        return {"compactness": self.compactness, "colorspace": self.colorspace}


class RegionalResult(NamedTuple):
    fused: SaliencyMap
    scales: list


@dataclass
class RegionalTrace:
    """Everything the regional engine computed along the way."""

    fused: SaliencyMap
    scales: list
    segmentations: list
    model: bg.BackgroundModel
    target_class: int
    baseline: np.ndarray
    region_scores: list = field(default_factory=list)


def regional_pd_trace(f, image, cls, cfg=PDConfig()):
    image = _as_raster(image)
    probs = f.predict(image.pixels)
    cls = resolve_class(probs, cls)
    base = probs[cls]
    model = bg.estimate_background(image, cfg.seed, bandwidth=cfg.bandwidth, sigma2=cfg.sigma2,
                                   bg_scale=cfg.bg_scale, **cfg.segment_kwargs)
    scales, segs, region_scores = [], [], []
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for k in ScaleLadder(cfg.r).target_counts:
            seg = segment(image, min(k, image.width * image.height), cfg.seed,
                          **cfg.segment_kwargs)

            def excluded_score(region, seg=seg, k=k):
                rng = bg.region_rng(cfg.seed, k, region)
                return f.predict(bg.sample_exclusion(image, seg, region, model, rng))[cls]

            regions = range(seg.region_count)
            scores = np.array(list(pool.map(excluded_score, regions)) if pool
                              else [excluded_score(i) for i in regions])
            values = np.array([max(0.0, cfg.g(base, s)) for s in scores])
            scales.append(SaliencyMap(values[seg.labels].astype(np.float32)))
            segs.append(seg)
            region_scores.append(scores)
    finally:
        if pool is not None:
            pool.shutdown()
    stack = np.stack([s.values.astype(np.float64) for s in scales])
    fused = SaliencyMap(stack.mean(axis=0).astype(np.float32))
    return RegionalTrace(fused, scales, segs, model, cls, probs, region_scores)


def regional_pd(f, image, cls, cfg=PDConfig()):
    """Regional multi-scale saliency.

    For each scale 2, 4, ..., 2**r the image is segmented, every region is
    replaced in turn by draws from the boundary-prior background model, and
    the non-negative score drop is painted over that region. The fused map is
    the mean of the per-scale maps. Returns ``(fused, per_scale_maps)``.
    """
    trace = regional_pd_trace(f, image, cls, cfg)
    return RegionalResult(trace.fused, trace.scales)


# --- call budgets --------------------------------------------------------------

def pixelwise_call_budget(height, width, samples):
    return 1 + samples * height * width


def regional_call_budget(r):
    """``(low, high)`` bounds on regional calls; ``low`` holds for exact region counts."""
    exact = sum(2 ** j for j in range(1, r + 1))
    return 1 + exact, 1 + 2 * exact
