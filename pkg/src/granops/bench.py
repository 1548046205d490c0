"""Repeated-timing benchmarks with warm-up accounting.

The first iteration of a workflow is often slower than the rest (caches,
lazy initialisation, JIT compilation).  Samples keep that first run flagged
instead of dropping it; :func:`summarize` reports it as ``first_run`` and
``warmup_ratio`` and lets callers trim it explicitly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

from .errors import DegenerateError, InsufficientDataError
from .tracing import now

DEFAULT_REPEATS = 100
IQR_FENCE = 1.5


class BenchSample(NamedTuple):
    iteration: int
    elapsed: float
    is_first_run: bool


def time_once(task: Callable[[], object], iteration: int = 0) -> BenchSample:
    """Wall time of one ``task()`` call in milliseconds.

    Put data loading outside ``task`` so it is not timed.
    """
    start = now()
    task()
    elapsed = now() - start
    return BenchSample(iteration, max(0.0, elapsed), iteration == 0)


def benchmark(task: Callable[[], object], repeats: int = DEFAULT_REPEATS) -> list[BenchSample]:
    if int(repeats) != repeats or repeats < 1:
        raise ValueError(f"repeats must be a positive integer, got {repeats!r}")
    return [time_once(task, i) for i in range(int(repeats))]


def quantile(sorted_values: Sequence[float], q: float) -> float:
    """Linear interpolation between closest ranks (Hyndman-Fan type 7)."""
    n = len(sorted_values)
    if n == 0:
        raise InsufficientDataError("no values")
    h = (n - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    return sorted_values[lo] + (h - lo) * (sorted_values[hi] - sorted_values[lo])


@dataclass
class BenchSummary:
    n: int
    median: float
    q25: float
    q75: float
    minimum: float
    maximum: float
    outliers: list[tuple[int, float]]
    first_run: float
    warmup_ratio: float
    discarded: int = 0
    label: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def iqr(self):
        return self.q75 - self.q25

    def to_dict(self):
        d = asdict(self)
        d["outliers"] = [list(o) for o in self.outliers]
        if not math.isfinite(d["warmup_ratio"]):
            d["warmup_ratio"] = None
        return d

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def summarize(samples: Sequence[BenchSample | float], discard_warmup: int = 0, label: str = "") -> BenchSummary:
    """Median, quartiles and 1.5 IQR outliers of the samples.

    Plain numbers are accepted and numbered in order.  ``discard_warmup``
    drops the first ``k`` samples from the statistics; the first run is still
    reported.
    """
    samples = [s if isinstance(s, BenchSample) else BenchSample(i, float(s), i == 0)
               for i, s in enumerate(samples)]
    if not samples:
        raise InsufficientDataError("no benchmark samples")
    first = samples[0].elapsed
    kept = samples[discard_warmup:]
    if not kept:
        raise InsufficientDataError(f"discarding {discard_warmup} samples leaves none")
    values = sorted(s.elapsed for s in kept)
    med = quantile(values, 0.5)
    q25, q75 = quantile(values, 0.25), quantile(values, 0.75)
    iqr = q75 - q25
    low, high = q25 - IQR_FENCE * iqr, q75 + IQR_FENCE * iqr
    outliers = [(s.iteration, s.elapsed) for s in kept if s.elapsed < low or s.elapsed > high]
    ratio = first / med if med > 0 else math.inf
    return BenchSummary(len(kept), med, q25, q75, values[0], values[-1], outliers, first, ratio,
                        discarded=discard_warmup, label=label)


def speedup(base: BenchSummary, accel: BenchSummary) -> float:
    """``base.median / accel.median``."""
    if accel.median == 0:
        raise DegenerateError("accelerated median is zero")
    return base.median / accel.median


def write_samples_csv(samples: Sequence[BenchSample], path, label: str = ""):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "iteration", "elapsed_ms", "is_first_run"])
        for s in samples:
            w.writerow([label, s.iteration, f"{s.elapsed:.6f}", int(s.is_first_run)])
