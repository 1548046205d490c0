"""Named op registry: the callable surface shared by the runtime and macros.

Parameters follow the order *input images, output images, other
parameters*.  Several names may point at one implementation (``minimum2DBox``
and ``minimum3DBox`` are both :func:`granops.filters.minimum_box`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import filters, labeling

IMAGE_IN = "image_in"
IMAGE_OUT = "image_out"
NUMBER = "number"


@dataclass(frozen=True)
class Param:
    name: str
    kind: str


@dataclass(frozen=True)
class OpSpec:
    name: str
    params: tuple[Param, ...]
    impl: Callable
    summary: str
    binary_inputs: bool = False
    label_inputs: bool = False

    @property
    def inputs(self):
        return [p for p in self.params if p.kind == IMAGE_IN]

    @property
    def outputs(self):
        return [p for p in self.params if p.kind == IMAGE_OUT]

    @property
    def numbers(self):
        return [p for p in self.params if p.kind == NUMBER]

    @property
    def arity(self):
        return len(self.params)

    def signature(self):
        return f"{self.name}({', '.join(p.name for p in self.params)})"

    def apply(self, images, numbers, backend):
        return self.impl(*images, *numbers, backend=backend)


OPS: dict[str, OpSpec] = {}


def _register(name, params, impl, summary, **flags):
    kinds = {"<": IMAGE_IN, ">": IMAGE_OUT, "#": NUMBER}
    parsed = tuple(Param(p[1:], kinds[p[0]]) for p in params.split())
    OPS[name] = OpSpec(name, parsed, impl, summary, **flags)


_register("gaussianBlur2D", "<source >destination #sigma_x #sigma_y", filters.gaussian_blur_2d,
          "Gaussian blur in x and y, kernel truncated at 3 sigma")

for _kind, _impl, _what in (("mean", filters.mean_box, "Mean"),
                            ("minimum", filters.minimum_box, "Minimum"),
                            ("maximum", filters.maximum_box, "Maximum")):
    _register(f"{_kind}Box", "<source >destination #radius_x #radius_y #radius_z", _impl,
              f"{_what} over a box neighbourhood")
    _register(f"{_kind}2DBox", "<source >destination #radius_x #radius_y", _impl,
              f"{_what} over a 2D box neighbourhood")
    _register(f"{_kind}3DBox", "<source >destination #radius_x #radius_y #radius_z", _impl,
              f"{_what} over a 3D box neighbourhood")

_register("topHatBox", "<source >destination #radius_x #radius_y #radius_z", filters.top_hat_box,
          "Subtract the box opening (minimum then maximum) from the image")
_register("subtractImages", "<subtrahend_from <subtrahend >destination", filters.subtract_images,
          "Pixelwise difference a - b")
_register("greaterConstant", "<source >destination #constant", filters.greater_constant,
          "1 where source > constant, else 0")
_register("thresholdOtsu", "<source >destination", labeling.threshold_otsu,
          "Binarise with the Otsu threshold of a 256-bin histogram")
_register("binaryFillHoles", "<source >destination", labeling.binary_fill_holes,
          "Fill background regions not connected to the image border", binary_inputs=True)
_register("connectedComponentsLabelingBox", "<source >destination", labeling.connected_components_labeling_box,
          "Label 8-connected components 1..n in raster order", binary_inputs=True)
_register("excludeLabelsOnEdges", "<source >destination", labeling.exclude_labels_on_edges,
          "Remove labels touching the image border and renumber", label_inputs=True)
_register("excludeLabelsOutsideSizeRange", "<source >destination #minimum_size #maximum_size",
          labeling.exclude_labels_outside_size_range,
          "Remove labels with pixel count outside [min, max] and renumber", label_inputs=True)
# spelling used in some published translation tables
OPS["excludeLabelsOnSizeRange"] = OpSpec("excludeLabelsOnSizeRange", OPS["excludeLabelsOutsideSizeRange"].params,
                                         labeling.exclude_labels_outside_size_range,
                                         OPS["excludeLabelsOutsideSizeRange"].summary, label_inputs=True)


def get_op(name) -> OpSpec:
    return OPS[name]


def unique_ops():
    """One spec per distinct implementation/arity pair, for exhaustive checks."""
    seen = set()
    for spec in OPS.values():
        key = (spec.impl, spec.arity)
        if key not in seen:
            seen.add(key)
            yield spec
