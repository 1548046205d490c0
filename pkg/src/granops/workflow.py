"""Nuclear-envelope segmentation and intensity measurement over a time lapse.

Per frame the nuclei channel is pushed as a 2D slice, segmented into a band
around the nucleus outline (``dilate(mask) - erode(mask)``), pulled back as
a mask and measured on the protein channel.

Two segmentation variants exist:

``original``
    blur, Otsu threshold, fill holes, label, drop edge objects, drop objects
    outside the size range, binarise, then dilate/erode/subtract.
``optimized``
    skips labeling and both exclusion steps.  Faster, but small debris and
    edge-touching objects stay in the mask.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError
from .image import Image, TimeLapse
from .measure import MeasurementRow, measure_masked_region
from .runtime import Runtime


class Variant(str, Enum):
    ORIGINAL = "original"
    OPTIMIZED = "optimized"


@dataclass(frozen=True)
class WorkflowParams:
    nuclei_channel: int = 0
    protein_channel: int = 1
    sigma: float = 1.5
    band_radius: int = 2
    minimum_size: float = 800
    maximum_size: float = 1_000_000
    variant: Variant = Variant.ORIGINAL

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.nuclei_channel == self.protein_channel:
            raise DomainError("nuclei and protein channels must differ")
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")
        if self.band_radius < 1 or self.band_radius != int(self.band_radius):
            raise DomainError("band radius must be an integer >= 1")
        if self.minimum_size > self.maximum_size:
            raise DomainError("minimum size exceeds maximum size")

    _ALIASES = {"radius": "band_radius", "min_size": "minimum_size", "max_size": "maximum_size"}

    def with_overrides(self, overrides: dict) -> "WorkflowParams":
        """Copy with fields replaced from ``{"sigma": "2.0", ...}`` style strings."""
        kwargs = {}
        fields = {f.name: f for f in dataclasses.fields(self)}
        for key, value in overrides.items():
            key = self._ALIASES.get(key, key)
            if key not in fields:
                raise KeyError(f"unknown workflow parameter {key!r}")
            current = getattr(self, key)
            if isinstance(current, Variant):
                kwargs[key] = Variant(value)
            elif isinstance(current, int) and not isinstance(current, bool):
                kwargs[key] = int(float(value))
            else:
                kwargs[key] = float(value)
        return dataclasses.replace(self, **kwargs)


def nucseg(rt: Runtime, source: str, p: WorkflowParams = WorkflowParams(), prefix: str = "") -> str:
    """Segment the nuclear envelope of buffer ``source``; returns the band buffer name."""
    n = (lambda s: prefix + s)
    rt.execute("gaussianBlur2D", source, n("blurred"), p.sigma, p.sigma)
    rt.execute("thresholdOtsu", n("blurred"), n("thresholded"))
    if p.variant is Variant.ORIGINAL:
        rt.execute("binaryFillHoles", n("thresholded"), n("holes_filled"))
        rt.execute("connectedComponentsLabelingBox", n("holes_filled"), n("labels"))
        rt.execute("excludeLabelsOnEdges", n("labels"), n("labels_wo_edges"))
        rt.execute("excludeLabelsOutsideSizeRange", n("labels_wo_edges"), n("large_labels"),
                   p.minimum_size, p.maximum_size)
        rt.execute("greaterConstant", n("large_labels"), n("binary_mask"), 0)
    else:
        rt.execute("binaryFillHoles", n("thresholded"), n("binary_mask"))
    r = p.band_radius
    rt.execute("maximum2DBox", n("binary_mask"), n("dilated"), r, r)
    rt.execute("minimum2DBox", n("binary_mask"), n("eroded"), r, r)
    return rt.execute("subtractImages", n("dilated"), n("eroded"), n("band"))


def run_workflow(tl: TimeLapse, p: WorkflowParams = WorkflowParams(), backend="reference",
                 threads=None, runtime: Runtime | None = None, segment=nucseg) -> list[MeasurementRow]:
    """Measure the protein channel inside the segmented band, frame by frame.

    ``segment(rt, source, params)`` must return the name of a binary band
    buffer; the default is :func:`nucseg`.
    """
    for ch in (p.nuclei_channel, p.protein_channel):
        if not 0 <= ch < tl.n_channels:
            raise IndexError(f"channel {ch} out of range for {tl.n_channels} channels")
    rt = runtime if runtime is not None else Runtime(backend, threads)
    rows = []
    try:
        for frame in range(tl.n_frames):
            rt.push_current_slice("nuclei", tl, frame, p.nuclei_channel)
            band = segment(rt, "nuclei", p)
            mask = rt.pull_as_mask(band)
            rows.append(measure_masked_region(tl.get(frame, p.protein_channel), mask, frame))
    finally:
        rt.clear()
    return rows


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class SynthParams:
    """Two-channel time lapse with one round nucleus.

    Channel 0 shows the nucleus as a bright disk.  Channel 1 shows a ring of
    half-width ``ring_width`` around the disk outline whose intensity is
    ``envelope_base + frame * envelope_gain``.  ``distractors`` are extra
    ``(x, y, radius)`` disks drawn in channel 0 only.
    """

    frames: int = 15
    width: int = 512
    height: int = 512
    nucleus_radius: float = 60.0
    center: tuple[float, float] | None = None
    nucleus_intensity: float = 60.0
    background: float = 10.0
    envelope_base: float = 20.0
    envelope_gain: float = 1.0
    ring_width: float = 6.0
    noise_amplitude: float = 2.0
    seed: int = 0
    distractors: tuple[tuple[float, float, float], ...] = field(default_factory=tuple)
    allow_edge_contact: bool = False

    def __post_init__(self):
        if self.frames < 1 or self.width < 1 or self.height < 1:
            raise DomainError("frames and image size must be >= 1")
        if self.nucleus_radius <= 0:
            raise DomainError("nucleus radius must be > 0")
        cx, cy = self.nucleus_center
        r = self.nucleus_radius
        interior = (cx - r >= 1 and cy - r >= 1 and cx + r <= self.width - 2 and cy + r <= self.height - 2)
        if not interior and not self.allow_edge_contact:
            raise DomainError("nucleus touches the image edge; set allow_edge_contact to permit it")

    @property
    def nucleus_center(self):
        if self.center is not None:
            return self.center
        return ((self.width - 1) / 2, (self.height - 1) / 2)


def _distance(width, height, cx, cy):
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    return np.hypot(xx - cx, yy - cy)


def envelope_level(sp: SynthParams, frame: int) -> float:
    return sp.envelope_base + frame * sp.envelope_gain


def synth_timelapse(sp: SynthParams = SynthParams()) -> TimeLapse:
    """Deterministic (given ``sp.seed``) two-channel nucleus time lapse."""
    rng = np.random.default_rng(sp.seed)
    cx, cy = sp.nucleus_center
    d = _distance(sp.width, sp.height, cx, cy)
    nucleus = np.full(d.shape, sp.background)
    nucleus[d <= sp.nucleus_radius] = sp.nucleus_intensity
    for x, y, r in sp.distractors:
        nucleus[_distance(sp.width, sp.height, x, y) <= r] = sp.nucleus_intensity
    ring = np.abs(d - sp.nucleus_radius) <= sp.ring_width
    frames = []
    for t in range(sp.frames):
        protein = np.full(d.shape, sp.background)
        protein[ring] = envelope_level(sp, t)
        chans = []
        for plane in (nucleus, protein):
            if sp.noise_amplitude:
                plane = plane + rng.uniform(-sp.noise_amplitude, sp.noise_amplitude, plane.shape)
            chans.append(Image(plane))
        frames.append(chans)
    return TimeLapse(frames)


def disk_mask(width, height, cx, cy, radius) -> np.ndarray:
    return _distance(width, height, cx, cy) <= radius


def disk_area(radius) -> float:
    return math.pi * radius * radius
