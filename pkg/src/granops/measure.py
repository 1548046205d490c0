"""Region statistics of an intensity image under a mask or label map.

Perimeter is the number of unit pixel edges separating the region from
non-region pixels or the image outside.  This is a plain edge count, not
ImageJ's contour-tracing perimeter, so perimeter and circularity values are
not comparable with ImageJ's numbers.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ShapeError
from .image import Image, as_binary, as_labels


@dataclass(frozen=True)
class MeasurementRow:
    frame: int
    area: int
    mean: float
    centroid_x: float
    centroid_y: float
    perimeter: float
    integrated_density: float
    circularity: float
    empty: bool = False

    def as_dict(self):
        return asdict(self)


def _edge_perimeter(mask: np.ndarray) -> int:
    padded = np.pad(mask, 1)
    inside = padded[1:-1, 1:-1]
    exposed = 0
    for sl in ((slice(0, -2), slice(1, -1)), (slice(2, None), slice(1, -1)),
               (slice(1, -1), slice(0, -2)), (slice(1, -1), slice(2, None))):
        exposed += int(np.count_nonzero(inside & ~padded[sl]))
    return exposed


def _measure(values: np.ndarray, mask: np.ndarray, frame: int) -> MeasurementRow:
    area = int(np.count_nonzero(mask))
    if area == 0:
        return MeasurementRow(frame, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, empty=True)
    ys, xs = np.nonzero(mask)
    integrated = float(values[mask].astype(np.float64).sum())
    perimeter = _edge_perimeter(mask)
    return MeasurementRow(
        frame=frame,
        area=area,
        mean=integrated / area,
        centroid_x=float(xs.mean()),
        centroid_y=float(ys.mean()),
        perimeter=float(perimeter),
        integrated_density=integrated,
        circularity=4 * math.pi * area / perimeter ** 2,
    )


def _planes(intensity, other):
    if intensity.shape != other.shape:
        raise ShapeError(f"intensity {intensity.shape} and mask {other.shape} differ in shape")
    if intensity.depth != 1:
        raise ShapeError("measurements are defined for 2D images")
    return intensity.array[0], other.array[0]


def measure_masked_region(intensity: Image, mask: Image, frame: int = 0) -> MeasurementRow:
    """Area, mean, centroid, perimeter, circularity and integrated density.

    An empty mask yields a zero row with ``empty=True`` instead of raising,
    so a frame without a detected object does not stop a time-lapse run.
    """
    values, m = _planes(intensity, as_binary(mask))
    return _measure(values, m == 1, frame)


def measure_labels(intensity: Image, labels: Image, frame: int = 0) -> list[MeasurementRow]:
    """One row per label id in ascending id order."""
    values, lab = _planes(intensity, as_labels(labels))
    lab = lab.astype(np.int64)
    return [_measure(values, lab == i, frame) for i in range(1, int(lab.max(initial=0)) + 1)]
