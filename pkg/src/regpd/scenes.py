"""Synthetic test scenes: coloured shapes on near-white backgrounds with exact masks."""

import json
from pathlib import Path

import numpy as np

from .imagery import BinaryMask, RasterImage, save_image, save_mask

WHITE = (255.0, 255.0, 255.0)
PALETTE = [
    (220.0, 30.0, 30.0),
    (30.0, 160.0, 40.0),
    (30.0, 60.0, 200.0),
    (240.0, 140.0, 20.0),
    (130.0, 40.0, 160.0),
    (20.0, 150.0, 150.0),
]
SHAPES = ("disk", "ellipse", "rectangle", "triangle")


def disk_mask(height, width, center, radius):
    yy, xx = np.mgrid[:height, :width]
    return (yy - center[0]) ** 2 + (xx - center[1]) ** 2 <= radius ** 2


def paint(mask, color, background=WHITE):
    out = np.empty(mask.shape + (3,), dtype=np.float32)
    out[...] = background
    out[mask] = color
    return out


def disk_image(size=64, radius=None, color=(255.0, 0.0, 0.0)):
    """Centred disk on pure white; returns ``(image, mask)``."""
    radius = size * 0.3 if radius is None else radius
    c = (size - 1) / 2.0
    mask = disk_mask(size, size, (c, c), radius)
    return RasterImage(paint(mask, color)), BinaryMask(mask)


TWO_BLOB_COLORS = ((220.0, 30.0, 30.0), (30.0, 60.0, 200.0))


def two_blob_image(size=64):
    """Two disks of different colours; returns ``(image, mask_a, mask_b)``."""
    a = disk_mask(size, size, (size * 0.35, size * 0.3), size * 0.17)
    b = disk_mask(size, size, (size * 0.65, size * 0.72), size * 0.15)
    pixels = paint(a, TWO_BLOB_COLORS[0])
    pixels[b] = TWO_BLOB_COLORS[1]
    return RasterImage(pixels), BinaryMask(a), BinaryMask(b)


def two_blob_params(size=64):
    """``(color, tolerance, reference_fraction)`` per blob, matched to the image."""
    _, a, b = two_blob_image(size)
    return [(TWO_BLOB_COLORS[0], 30.0, float(a.values.mean())),
            (TWO_BLOB_COLORS[1], 30.0, float(b.values.mean()))]


def shape_mask(kind, height, width, rng):
    yy, xx = np.mgrid[:height, :width].astype(np.float64)
    cy = rng.uniform(0.35, 0.65) * height
    cx = rng.uniform(0.35, 0.65) * width
    scale = rng.uniform(0.16, 0.26) * min(height, width)
    if kind == "disk":
        return (yy - cy) ** 2 + (xx - cx) ** 2 <= scale ** 2
    if kind == "ellipse":
        theta = rng.uniform(0, np.pi)
        u = (yy - cy) * np.cos(theta) + (xx - cx) * np.sin(theta)
        v = -(yy - cy) * np.sin(theta) + (xx - cx) * np.cos(theta)
        return (u / (1.3 * scale)) ** 2 + (v / (0.7 * scale)) ** 2 <= 1.0
    if kind == "rectangle":
        hh, hw = scale * rng.uniform(0.7, 1.2), scale * rng.uniform(0.7, 1.2)
        return (np.abs(yy - cy) <= hh) & (np.abs(xx - cx) <= hw)
    if kind == "triangle":
        angles = rng.uniform(0, 2 * np.pi) + np.array([0, 2, 4]) * np.pi / 3
        vy = cy + 1.3 * scale * np.sin(angles)
        vx = cx + 1.3 * scale * np.cos(angles)
        inside = np.ones_like(yy, dtype=bool)
        for i in range(3):
            j = (i + 1) % 3
            cross = (vx[j] - vx[i]) * (yy - vy[i]) - (vy[j] - vy[i]) * (xx - vx[i])
            inside &= cross >= 0
        return inside
    raise ValueError(f"unknown shape {kind!r}")


def corpus_item(index, size=64, seed=0):
    """One corpus scene; returns ``(image, mask, color)``."""
    rng = np.random.default_rng([seed, index])
    kind = SHAPES[index % len(SHAPES)]
    color = PALETTE[index % len(PALETTE)]
    mask = shape_mask(kind, size, size, rng)
    pixels = 245.0 + rng.uniform(-6.0, 6.0, size=(size, size, 3))
    pixels[mask] = np.asarray(color) + rng.uniform(-4.0, 4.0, size=(int(mask.sum()), 3))
    pixels = np.rint(pixels).astype(np.float32)
    return RasterImage(pixels), BinaryMask(mask), color


def write_corpus(root, count=20, size=64, seed=0):
    """Write ``images/``, ``masks/`` and ``corpus.json`` under ``root``.

    ``corpus.json`` maps each stem to the area-fraction oracle parameters
    that make the object the only score-bearing feature.
    """
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    meta = {}
    for i in range(count):
        image, mask, color = corpus_item(i, size, seed)
        stem = f"shape_{i:02d}"
        save_image(image, root / "images" / f"{stem}.png")
        save_mask(mask, root / "masks" / f"{stem}.png")
        meta[stem] = {
            "target_color": list(color),
            "tolerance": 30.0,
            "reference_fraction": round(float(mask.values.mean()), 6),
        }
    (root / "corpus.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta
