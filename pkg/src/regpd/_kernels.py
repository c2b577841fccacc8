"""Hot inner loops of the segmenter, each in a numba and a numpy flavour.

Both flavours produce identical results; ``tests/test_kernels.py`` checks
parity and ``benchmarks/bench_kernels.py`` compares their speed. The public
names at the bottom are bound according to :mod:`regpd._accel`.
"""

import math

import numpy as np
from scipy import ndimage

from ._accel import USE_NUMBA, njit


def _window(cy, cx, half_h, half_w, height, width):
    y0 = max(0, int(math.floor(cy - half_h)))
    y1 = min(height - 1, int(math.ceil(cy + half_h)))
    x0 = max(0, int(math.floor(cx - half_w)))
    x1 = min(width - 1, int(math.ceil(cx + half_w)))
    return y0, y1, x0, x1


_window_jit = njit(_window)


@njit
def _slic_assign_loop(img, centers, half_h, half_w, weight, labels, dist):
    height, width = labels.shape
    for c in range(centers.shape[0]):
        cy = centers[c, 0]
        cx = centers[c, 1]
        c0 = centers[c, 2]
        c1 = centers[c, 3]
        c2 = centers[c, 4]
        y0, y1, x0, x1 = _window_jit(cy, cx, half_h, half_w, height, width)
        for y in range(y0, y1 + 1):
            dy = y - cy
            for x in range(x0, x1 + 1):
                dx = x - cx
                d0 = img[y, x, 0] - c0
                d1 = img[y, x, 1] - c1
                d2 = img[y, x, 2] - c2
                d = (d0 * d0 + d1 * d1 + d2 * d2) + weight * (dy * dy + dx * dx)
                if d < dist[y, x]:
                    dist[y, x] = d
                    labels[y, x] = c


def slic_assign_numba(img, centers, half_h, half_w, weight, labels, dist):
    """Windowed nearest-center assignment, in place on ``labels``/``dist``."""
    _slic_assign_loop(img, centers, half_h, half_w, weight, labels, dist)


def slic_assign_numpy(img, centers, half_h, half_w, weight, labels, dist):
    height, width = labels.shape
    for c in range(centers.shape[0]):
        cy, cx, c0, c1, c2 = centers[c]
        y0, y1, x0, x1 = _window(cy, cx, half_h, half_w, height, width)
        patch = img[y0:y1 + 1, x0:x1 + 1]
        dy = (np.arange(y0, y1 + 1) - cy)[:, None]
        dx = (np.arange(x0, x1 + 1) - cx)[None, :]
        d0 = patch[..., 0] - c0
        d1 = patch[..., 1] - c1
        d2 = patch[..., 2] - c2
        d = (d0 * d0 + d1 * d1 + d2 * d2) + weight * (dy * dy + dx * dx)
        sub_dist = dist[y0:y1 + 1, x0:x1 + 1]
        better = d < sub_dist
        sub_dist[better] = d[better]
        labels[y0:y1 + 1, x0:x1 + 1][better] = c


@njit
def _components_loop(labels, out):
    height, width = labels.shape
    stack = np.empty(height * width, dtype=np.int64)
    n = 0
    for sy in range(height):
        for sx in range(width):
            if out[sy, sx] >= 0:
                continue
            value = labels[sy, sx]
            out[sy, sx] = n
            top = 0
            stack[top] = sy * width + sx
            top += 1
            while top > 0:
                top -= 1
                p = stack[top]
                y = p // width
                x = p - y * width
                if y > 0 and out[y - 1, x] < 0 and labels[y - 1, x] == value:
                    out[y - 1, x] = n
                    stack[top] = p - width
                    top += 1
                if y < height - 1 and out[y + 1, x] < 0 and labels[y + 1, x] == value:
                    out[y + 1, x] = n
                    stack[top] = p + width
                    top += 1
                if x > 0 and out[y, x - 1] < 0 and labels[y, x - 1] == value:
                    out[y, x - 1] = n
                    stack[top] = p - 1
                    top += 1
                if x < width - 1 and out[y, x + 1] < 0 and labels[y, x + 1] == value:
                    out[y, x + 1] = n
                    stack[top] = p + 1
                    top += 1
            n += 1
    return n


def components_numba(labels):
    """4-connected components of equal-label pixels.

    Component ids follow raster order of each component's first pixel.
    Returns ``(component_map, count)``.
    """
    out = np.full(labels.shape, -1, dtype=np.int64)
    n = _components_loop(np.ascontiguousarray(labels, dtype=np.int64), out)
    return out, int(n)


_FOUR = ndimage.generate_binary_structure(2, 1)


def components_numpy(labels):
    labels = np.asarray(labels)
    out = np.empty(labels.shape, dtype=np.int64)
    offset = 0
    for value in np.unique(labels):
        mask = labels == value
        comp, n = ndimage.label(mask, structure=_FOUR)
        out[mask] = comp[mask] - 1 + offset
        offset += n
    return canonical_relabel(out), offset


def canonical_relabel(labels):
    """Renumber labels densely in raster order of first appearance."""
    flat = labels.ravel()
    uniq, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq))
    return rank[inverse].reshape(labels.shape)


if USE_NUMBA:
    slic_assign = slic_assign_numba
    components = components_numba
else:
    slic_assign = slic_assign_numpy
    components = components_numpy
