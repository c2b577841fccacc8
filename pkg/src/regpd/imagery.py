"""Raster types and file I/O for images, masks and saliency maps.

Images live on the [0, 255] float32 scale throughout the package. Raw
saliency maps use a small float-map format::

    PF-GRAY <width> <height>\\n
    <width*height little-endian float32, row-major, top row first>
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError

PFM_MAGIC = b"PF-GRAY"
_ACCEPTED_MODES = ("RGB", "RGBA", "L", "P", "LA")


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype, copy=True, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class RasterImage:
    """H x W x 3 float32 image on the [0, 255] scale.

    ``pixels`` is a read-only C-contiguous array.
    """

    pixels: np.ndarray

    def __post_init__(self):
        data = _frozen(self.pixels, np.float32)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ValueError(f"expected an HxWx3 array, got shape {data.shape}")
        if data.shape[0] == 0 or data.shape[1] == 0:
            raise ValueError("image has zero size")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 255.0:
            raise ValueError("samples must be finite and lie in [0, 255]")
        object.__setattr__(self, "pixels", data)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def data(self):
        """Flat row-major view of the samples."""
        return self.pixels.reshape(-1)


@dataclass(frozen=True)
class SaliencyMap:
    """H x W float32 relevance raster.

    ``signed`` is True for maps that may legitimately carry negative values
    (the pixel-wise engine); regional maps are clamped and unsigned.
    """

    values: np.ndarray
    signed: bool = False

    def __post_init__(self):
        data = _frozen(self.values, np.float32)
        if data.ndim != 2:
            raise ValueError(f"expected an HxW array, got shape {data.shape}")
        if not self.signed and data.size and data.min() < 0.0:
            raise ValueError("unsigned saliency map holds negative values")
        object.__setattr__(self, "values", data)

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def data(self):
        return self.values.reshape(-1)


@dataclass(frozen=True)
class BinaryMask:
    values: np.ndarray = field()

    def __post_init__(self):
        data = _frozen(self.values, bool)
        if data.ndim != 2:
            raise ValueError(f"expected an HxW array, got shape {data.shape}")
        object.__setattr__(self, "values", data)

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape


def _open(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    try:
        img = Image.open(path)
        img.load()
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"unsupported image format: {path}") from exc
    if img.width == 0 or img.height == 0:
        raise ImageFormatError(f"zero-sized image: {path}")
    return img


def load_image(path):
    """Read an 8-bit image file as a :class:`RasterImage`."""
    img = _open(path)
    if img.mode not in _ACCEPTED_MODES:
        raise ImageFormatError(f"unsupported pixel mode {img.mode!r} in {path}; need 8-bit RGB")
    return RasterImage(np.asarray(img.convert("RGB"), dtype=np.float32))


def save_image(image, path):
    """Write an image as 8-bit RGB, rounding to the nearest integer level."""
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    out = np.clip(np.rint(pixels), 0, 255).astype(np.uint8)
    Image.fromarray(out, mode="RGB").save(path)


def load_mask(path):
    """Read an 8-bit grayscale mask; levels >= 128 are foreground."""
    img = _open(path)
    if img.mode not in _ACCEPTED_MODES:
        raise ImageFormatError(f"unsupported pixel mode {img.mode!r} in {path}")
    return BinaryMask(np.asarray(img.convert("L")) >= 128)


def save_mask(mask, path):
    values = mask.values if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    Image.fromarray(values.astype(np.uint8) * 255, mode="L").save(path)


def write_raw(values, path):
    values = np.asarray(values)
    height, width = values.shape
    header = PFM_MAGIC + f" {width} {height}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_raw(path):
    """Read a ``PF-GRAY`` float map as an HxW float32 array."""
    with open(path, "rb") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 3 or parts[0] != PFM_MAGIC:
            raise ImageFormatError(f"not a PF-GRAY float map: {path}")
        width, height = int(parts[1]), int(parts[2])
        payload = fh.read()
    if len(payload) != 4 * width * height:
        raise ImageFormatError(
            f"{path}: expected {4 * width * height} payload bytes, found {len(payload)}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(height, width).astype(np.float32)


def read_saliency(path):
    values = read_raw(path)
    return SaliencyMap(values, signed=bool(values.size and values.min() < 0))


def normalize(values):
    """Min-max normalise to [0, 1]; constant input maps to all zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def colormap(t):
    """Jet-style colormap: 0 is dark blue, 1 is dark red. Returns uint8 RGB."""
    t = np.asarray(t, dtype=np.float64)[..., None]
    anchors = np.array([3.0, 2.0, 1.0])
    rgb = np.clip(1.5 - np.abs(4.0 * t - anchors), 0.0, 1.0)
    return np.rint(rgb * 255).astype(np.uint8)


def heatmap(smap):
    values = smap.values if isinstance(smap, SaliencyMap) else np.asarray(smap)
    return colormap(normalize(values))


def overlay(image, smap, alpha=0.5):
    """Alpha-blend the heatmap of ``smap`` over ``image`` (uint8 RGB out)."""
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    blended = (1.0 - alpha) * pixels + alpha * heatmap(smap).astype(np.float64)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def save_saliency(smap, path, mode="raw"):
    """Write a saliency map as a raw float map or an 8-bit heatmap."""
    if mode == "raw":
        write_raw(smap.values, path)
    elif mode == "heatmap":
        Image.fromarray(heatmap(smap), mode="RGB").save(path)
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'raw' or 'heatmap'")
