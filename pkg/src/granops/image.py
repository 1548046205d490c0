"""Raster types shared by every operation.

An :class:`Image` is a dense 2D or 3D scalar raster stored as a read-only
``float32`` array of shape ``(depth, height, width)``.  C order makes the
flat index ``((z * height) + y) * width + x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, EmptyInputError, InvalidDimensionError, ShapeError

N_BINS = 256


class Image:
    """Immutable scalar raster with 32-bit float pixels.

    Parameters
    ----------
    array : array_like
        2D ``(height, width)`` or 3D ``(depth, height, width)`` pixel data.
        The values are copied; 16-bit integer sources convert losslessly.
    """

    __slots__ = ("_array",)

    def __init__(self, array):
        arr = np.array(array, dtype=np.float32, copy=True)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3:
            raise InvalidDimensionError(f"expected 2D or 3D data, got {arr.ndim}D")
        if min(arr.shape) < 1:
            raise InvalidDimensionError(f"all dimensions must be >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise DomainError("image values must be finite")
        arr.setflags(write=False)
        self._array = arr
        self._validate()

    def _validate(self):
        pass

    @classmethod
    def _wrap(cls, arr):
        # trusted constructor for kernel outputs: no copy, no validation
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        arr.setflags(write=False)
        obj._array = arr
        return obj

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(depth, height, width)`` view of the pixels."""
        return self._array

    @property
    def plane(self) -> np.ndarray:
        """The single ``(height, width)`` plane of a 2D image."""
        if self.depth != 1:
            raise ShapeError("image is 3D; no single plane")
        return self._array[0]

    @property
    def data(self) -> np.ndarray:
        """Flat row-major pixel view."""
        return self._array.reshape(-1)

    @property
    def width(self) -> int:
        return self._array.shape[2]

    @property
    def height(self) -> int:
        return self._array.shape[1]

    @property
    def depth(self) -> int:
        return self._array.shape[0]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self._array.shape

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def nbytes(self) -> int:
        return 4 * self.size

    def copy(self):
        return type(self)._wrap(self._array.copy())

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._array, other._array)

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(width={self.width}, height={self.height}, depth={self.depth})"


class BinaryImage(Image):
    """Image whose pixels are exactly 0 or 1."""

    __slots__ = ()

    def _validate(self):
        if not is_binary(self._array):
            raise DomainError("binary image must contain only 0 and 1")


class LabelMap(Image):
    """Integer raster: 0 is background, objects carry ids ``1..n``."""

    __slots__ = ()

    def _validate(self):
        a = self._array
        if (a < 0).any() or (a != np.floor(a)).any():
            raise DomainError("labels must be non-negative integers")

    @property
    def labels(self) -> np.ndarray:
        return self._array.astype(np.int64)

    @property
    def n_labels(self) -> int:
        return int(self._array.max()) if self.size else 0


def is_binary(arr) -> bool:
    arr = np.asarray(arr)
    return bool(((arr == 0) | (arr == 1)).all())


def as_binary(img: Image) -> BinaryImage:
    """Reinterpret ``img`` as a :class:`BinaryImage`, raising DomainError otherwise."""
    if isinstance(img, BinaryImage):
        return img
    if not is_binary(img.array):
        raise DomainError("operation requires a binary image (values 0 and 1 only)")
    return BinaryImage._wrap(img.array)


def as_labels(img: Image) -> LabelMap:
    if isinstance(img, LabelMap):
        return img
    a = img.array
    if (a < 0).any() or (a != np.floor(a)).any():
        raise DomainError("operation requires a label map (non-negative integers)")
    return LabelMap._wrap(a)


def make_image(width: int, height: int, depth: int = 1, fill: float = 0.0) -> Image:
    for name, v in (("width", width), ("height", height), ("depth", depth)):
        if int(v) != v or v < 1:
            raise InvalidDimensionError(f"{name} must be a positive integer, got {v!r}")
    if not np.isfinite(fill):
        raise DomainError("fill value must be finite")
    return Image._wrap(np.full((int(depth), int(height), int(width)), fill, dtype=np.float32))


@dataclass(frozen=True)
class Histogram:
    """256-bin histogram over the closed range ``[lo, hi]`` of an image."""

    bins: np.ndarray
    lo: float
    hi: float

    @property
    def total(self) -> int:
        return int(self.bins.sum())


def bin_indices(values, lo: float, hi: float) -> np.ndarray:
    """Histogram bin of each value: ``floor((v - lo) / (hi - lo) * 255)`` clamped."""
    v = np.asarray(values, dtype=np.float64)
    if hi == lo:
        return np.zeros(v.shape, dtype=np.int64)
    idx = np.floor((v - lo) / (hi - lo) * (N_BINS - 1))
    return np.clip(idx, 0, N_BINS - 1).astype(np.int64)


def histogram256(img: Image) -> Histogram:
    if img.size == 0:
        raise EmptyInputError("cannot histogram an empty image")
    lo = float(img.array.min())
    hi = float(img.array.max())
    idx = bin_indices(img.data, lo, hi)
    bins = np.bincount(idx, minlength=N_BINS).astype(np.int64)
    bins.setflags(write=False)
    return Histogram(bins=bins, lo=lo, hi=hi)


class TimeLapse:
    """Frames x channels grid of equally sized images.

    Parameters
    ----------
    frames : sequence of sequences of Image
        ``frames[t][c]`` is the image of channel ``c`` at time point ``t``.
    """

    def __init__(self, frames: Sequence[Sequence[Image]]):
        frames = [list(chs) for chs in frames]
        if not frames or not frames[0]:
            raise InvalidDimensionError("time lapse needs at least one frame and one channel")
        n_ch = len(frames[0])
        shape = frames[0][0].shape
        for t, chs in enumerate(frames):
            if len(chs) != n_ch:
                raise ShapeError(f"frame {t} has {len(chs)} channels, expected {n_ch}")
            for c, img in enumerate(chs):
                if img.shape != shape:
                    raise ShapeError(f"image at frame {t}, channel {c} has shape {img.shape}, expected {shape}")
        self._frames = frames

    @classmethod
    def from_array(cls, arr):
        """Build from a ``(frames, channels, height, width)`` array."""
        arr = np.asarray(arr)
        if arr.ndim != 4:
            raise InvalidDimensionError("expected (frames, channels, height, width)")
        return cls([[Image(arr[t, c]) for c in range(arr.shape[1])] for t in range(arr.shape[0])])

    def to_array(self) -> np.ndarray:
        return np.stack([np.stack([img.plane for img in chs]) for chs in self._frames])

    @property
    def n_frames(self) -> int:
        return len(self._frames)

    @property
    def n_channels(self) -> int:
        return len(self._frames[0])

    @property
    def width(self) -> int:
        return self._frames[0][0].width

    @property
    def height(self) -> int:
        return self._frames[0][0].height

    def get(self, frame: int, channel: int) -> Image:
        if not 0 <= frame < self.n_frames:
            raise IndexError(f"frame {frame} out of range [0, {self.n_frames})")
        if not 0 <= channel < self.n_channels:
            raise IndexError(f"channel {channel} out of range [0, {self.n_channels})")
        return self._frames[frame][channel]

    def __eq__(self, other):
        if not isinstance(other, TimeLapse):
            return NotImplemented
        return (self.n_frames, self.n_channels) == (other.n_frames, other.n_channels) and all(
            a == b for fa, fb in zip(self._frames, other._frames) for a, b in zip(fa, fb)
        )

    __hash__ = None

    def __repr__(self):
        return (f"TimeLapse(frames={self.n_frames}, channels={self.n_channels}, "
                f"width={self.width}, height={self.height})")
