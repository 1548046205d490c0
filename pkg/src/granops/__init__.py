"""Granular image operations on a named-buffer runtime.

Each operation is a single side-effect-free transform of float32 images.
Operations run through a :class:`Runtime` that stores images by name, can
trace timings, and dispatches to a reference or a multi-threaded backend
that produce bit-identical results.
"""
from .backend import Backend, BackendKind, get_backend
from .bench import BenchSample, BenchSummary, benchmark, speedup, summarize
from .errors import *  # noqa: F401,F403
from .filters import (gaussian_blur_2d, greater_constant, maximum_box, mean_box, minimum_box,
                      subtract_images, top_hat_box)
from .image import BinaryImage, Histogram, Image, LabelMap, TimeLapse, histogram256, make_image
from .io import read_pgm, read_stack, write_measurements_csv, write_pgm, write_stack
from .labeling import (binary_fill_holes, connected_components_labeling_box, exclude_labels_on_edges,
                       exclude_labels_outside_size_range, otsu_threshold_value, threshold_otsu)
from .macro import ScriptSegmenter, format_script, parse_script, run_script, shipped_script
from .measure import MeasurementRow, measure_labels, measure_masked_region
from .registry import OPS, get_op
from .runtime import Runtime
from .stats import bland_altman, compare_methods, compare_series, paired_t, pearson_r, tost
from .tracing import Tracer, format_trace
from .workflow import SynthParams, Variant, WorkflowParams, nucseg, run_workflow, synth_timelapse

__version__ = "0.1.0"
