"""Neighbourhood and pixelwise raster operations.

All neighbourhood filters clamp coordinates to the nearest edge pixel.
Separable filters process x, then z, then y; every output pixel sees the
same sequence of floating point operations whatever the row banding, which
keeps the reference and parallel backends bit-identical.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .backend import get_backend
from .errors import DomainError, ShapeError
from .image import BinaryImage, Image
from .tracing import traced


class BoxRadii(NamedTuple):
    rx: int
    ry: int
    rz: int = 0

    @property
    def size(self):
        return (2 * self.rx + 1, 2 * self.ry + 1, 2 * self.rz + 1)


class GaussianSigma(NamedTuple):
    sx: float
    sy: float


def _radius(value, name):
    r = float(value)
    if r < 0 or r != int(r):
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return int(r)


def box_radii(rx, ry, rz=0) -> BoxRadii:
    return BoxRadii(_radius(rx, "rx"), _radius(ry, "ry"), _radius(rz, "rz"))


def gaussian_weights(sigma: float) -> np.ndarray:
    """Sampled Gaussian truncated at ``ceil(3 sigma)`` and renormalised to sum 1."""
    sigma = float(sigma)
    if sigma < 0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be finite and >= 0, got {sigma!r}")
    if sigma == 0:
        return np.ones(1)
    r = math.ceil(3 * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2 * sigma * sigma))
    return w / w.sum()


def _taps(block, axis, r, halo_included=False):
    """Yield the ``2r + 1`` shifted views of ``block`` along ``axis``.

    Without a halo the axis is edge-padded (clamp); with ``halo_included``
    the block already carries ``r`` extra entries on each side.
    """
    n = block.shape[axis]
    if halo_included:
        m = n - 2 * r
    else:
        if r:
            pad = [(0, 0)] * block.ndim
            pad[axis] = (r, r)
            block = np.pad(block, pad, mode="edge")
        m = n
    index = [slice(None)] * block.ndim
    for t in range(2 * r + 1):
        index[axis] = slice(t, t + m)
        yield block[tuple(index)]


def _weighted(views, weights):
    acc = None
    for w, v in zip(weights, views):
        term = v * w
        acc = term if acc is None else acc + term
    return acc


def _reduce(views, ufunc):
    acc = None
    for v in views:
        acc = v.copy() if acc is None else ufunc(acc, v)
    return acc


def _halo_rows(src, y0, y1, ry):
    h = src.shape[1]
    rows = np.clip(np.arange(y0 - ry, y1 + ry), 0, h - 1)
    return src[:, rows, :]


def _separable(img, backend, rx, ry, rz, along):
    """Run ``along(block, axis, r, halo)`` over x, z, then y for each row band."""
    src = img.array
    be = get_backend(backend)

    def kernel(out, y0, y1):
        block = _halo_rows(src, y0, y1, ry).astype(np.float64)
        block = along(block, 2, rx, False)
        block = along(block, 0, rz, False)
        block = along(block, 1, ry, True)
        out[:, y0:y1, :] = block

    return be.run_rows(kernel, src.shape)


@traced("gaussianBlur2D")
def gaussian_blur_2d(img: Image, sigma_x: float, sigma_y: float | None = None, backend=None) -> Image:
    """Separable Gaussian blur in the xy-plane (each z plane independently)."""
    if sigma_y is None:
        sigma_y = sigma_x
    wx = gaussian_weights(sigma_x)
    wy = gaussian_weights(sigma_y)
    weights = {2: wx, 1: wy, 0: np.ones(1)}

    def along(block, axis, r, halo):
        w = weights[axis]
        return _weighted(_taps(block, axis, len(w) // 2, halo), w)

    return Image._wrap(_separable(img, backend, len(wx) // 2, len(wy) // 2, 0, along))


@traced("meanBox")
def mean_box(img: Image, rx, ry, rz=0, backend=None) -> Image:
    """Arithmetic mean over the clamped ``(2rx+1) x (2ry+1) x (2rz+1)`` box."""
    r = box_radii(rx, ry, rz)
    if img.depth == 1:
        r = r._replace(rz=0)
    count = float(np.prod(r.size))

    def along(block, axis, rad, halo):
        total = _reduce(_taps(block, axis, rad, halo), np.add)
        # y is the last axis processed: divide once the full box sum exists
        return total / count if axis == 1 else total

    return Image._wrap(_separable(img, backend, r.rx, r.ry, r.rz, along))


def _rank_box(img, rx, ry, rz, ufunc, backend):
    r = box_radii(rx, ry, rz)
    if img.depth == 1:
        r = r._replace(rz=0)
    src = img.array
    be = get_backend(backend)

    def kernel(out, y0, y1):
        block = _halo_rows(src, y0, y1, r.ry)
        block = _reduce(_taps(block, 2, r.rx), ufunc)
        block = _reduce(_taps(block, 0, r.rz), ufunc)
        out[:, y0:y1, :] = _reduce(_taps(block, 1, r.ry, True), ufunc)

    return be.run_rows(kernel, src.shape)


def _same_kind(img, arr):
    # min/max of a binary image stays binary
    if isinstance(img, BinaryImage):
        return BinaryImage._wrap(arr)
    return Image._wrap(arr)


@traced("minimumBox")
def minimum_box(img: Image, rx, ry, rz=0, backend=None) -> Image:
    """Grayscale erosion with a clamped box neighbourhood."""
    return _same_kind(img, _rank_box(img, rx, ry, rz, np.minimum, backend))


@traced("maximumBox")
def maximum_box(img: Image, rx, ry, rz=0, backend=None) -> Image:
    """Grayscale dilation with a clamped box neighbourhood."""
    return _same_kind(img, _rank_box(img, rx, ry, rz, np.maximum, backend))


@traced("topHatBox")
def top_hat_box(img: Image, rx, ry, rz=0, backend=None) -> Image:
    """White top-hat: ``img - maximum_box(minimum_box(img))``."""
    opened = maximum_box(minimum_box(img, rx, ry, rz, backend=backend), rx, ry, rz, backend=backend)
    return subtract_images(img, opened, backend=backend)


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")


@traced("subtractImages")
def subtract_images(a: Image, b: Image, backend=None) -> Image:
    """Pixelwise ``a - b``; negative results are kept."""
    _check_same_shape(a, b)
    x, y = a.array, b.array

    def kernel(out, y0, y1):
        np.subtract(x[:, y0:y1], y[:, y0:y1], out=out[:, y0:y1])

    return Image._wrap(get_backend(backend).run_rows(kernel, x.shape))


@traced("greaterConstant")
def greater_constant(img: Image, constant: float, backend=None) -> BinaryImage:
    """1 where ``img > constant`` (strict), else 0."""
    src = img.array
    # float64 scalar so the comparison is not rounded to float32
    c = np.float64(constant)

    def kernel(out, y0, y1):
        out[:, y0:y1] = src[:, y0:y1] > c

    return BinaryImage._wrap(get_backend(backend).run_rows(kernel, src.shape))
