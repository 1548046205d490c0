"""Thresholding, hole filling, connected components labeling and label filters.

Together these decompose a classic "analyze particles" call into explicit
steps: threshold, fill holes, label, drop edge objects, drop objects outside
a size range, and binarise again with :func:`granops.filters.greater_constant`.

Labeling uses a data-parallel union-find: every foreground pixel starts as
its own root, each round hooks the larger root of every mismatched
neighbour pair onto the smaller one, and pointer jumping compresses the
forest.  The surviving root of a component is therefore its smallest flat
index, i.e. the component's first pixel in raster order, so the final ids
do not depend on how the work was split.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .backend import get_backend
from .errors import EmptyInputError, InvalidRangeError, ShapeError
from .filters import greater_constant
from .image import N_BINS, BinaryImage, Histogram, Image, LabelMap, as_binary, as_labels, histogram256
from .tracing import traced


class SizeRange(NamedTuple):
    min_pixels: int
    max_pixels: int


def size_range(min_pixels, max_pixels) -> SizeRange:
    lo, hi = float(min_pixels), float(max_pixels)
    if lo < 0 or hi < 0:
        raise InvalidRangeError("size bounds must be non-negative")
    if lo > hi:
        raise InvalidRangeError(f"minimum size {min_pixels} exceeds maximum size {max_pixels}")
    return SizeRange(lo, hi)


class OtsuResult(NamedTuple):
    threshold_value: float
    bin_index: int


# ---------------------------------------------------------------------------
# Otsu


def otsu_bin_index(counts) -> int:
    """Split ``k`` in ``[0, 255)`` maximising the between-class variance.

    Class 0 holds bins ``0..k``.  The comparison runs on exact integers:
    ``w0 w1 (mu0 - mu1)^2`` equals ``(s0 n1 - s1 n0)^2 / (n0 n1 N^2)`` where
    ``n`` are counts and ``s`` are bin-index sums, so ties are real ties and
    resolve to the lowest ``k``.
    """
    counts = [int(c) for c in counts]
    if sum(counts) == 0:
        raise EmptyInputError("histogram has no counts")
    n_total = sum(counts)
    s_total = sum(i * c for i, c in enumerate(counts))
    best_k, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for k in range(len(counts) - 1):
        n0 += counts[k]
        s0 += k * counts[k]
        n1 = n_total - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * n1 - (s_total - s0) * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return best_k


def otsu_threshold_value(hist: Histogram) -> OtsuResult:
    """Otsu split of a 256-bin histogram and the pixel value separating it.

    The value is the centre of bin ``k`` under the binning rule of
    :func:`granops.image.histogram256`, ``lo + (k + 0.5) (hi - lo) / 255``;
    on 256-level integer data it sits exactly between levels ``k`` and ``k+1``.
    """
    if hist.total == 0:
        raise EmptyInputError("histogram has no counts")
    if hist.hi == hist.lo:
        return OtsuResult(float(hist.lo), 0)
    k = otsu_bin_index(hist.bins)
    value = hist.lo + (k + 0.5) * (hist.hi - hist.lo) / (N_BINS - 1)
    return OtsuResult(float(value), k)


@traced("thresholdOtsu")
def threshold_otsu(img: Image, backend=None) -> BinaryImage:
    """Binarise with the Otsu threshold; a constant image gives all zeros."""
    hist = histogram256(img)
    if hist.hi == hist.lo:
        return BinaryImage._wrap(np.zeros(img.shape, dtype=np.float32))
    return greater_constant(img, otsu_threshold_value(hist).threshold_value, backend=backend)


# ---------------------------------------------------------------------------
# connected components

# (dy, dx) offsets to the next row; horizontal neighbours are handled by runs
_NEXT_ROW = {
    4: ((1, 0),),
    8: ((1, 0), (1, 1), (1, -1)),
}


def _run_starts(fg, y0, y1, out):
    """Write, for every pixel of rows [y0, y1), the flat index of the start of
    its horizontal run (meaningful only on foreground pixels)."""
    w = fg.shape[1]
    band = fg[y0:y1]
    starts = band.copy()
    starts[:, 1:] &= ~band[:, :-1]
    marker = np.where(starts, np.arange(y0 * w, y1 * w).reshape(-1, w), -1)
    np.maximum.accumulate(marker, axis=1, out=out[y0:y1])
    return np.flatnonzero(starts) + y0 * w


def _run_pairs(fg, run, y0, y1, connectivity):
    """Run-start pairs joined across rows y -> y+1 for y in [y0, y1).

    Along a stretch of consecutive touching columns both rows stay inside the
    same two runs, so only the first column of each stretch is kept.
    """
    h, w = fg.shape
    ps, qs = [], []
    yb = min(y1, h - 1)
    if yb <= y0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    for dy, dx in _NEXT_ROW[connectivity]:
        xa, xb = max(0, -dx), w - max(0, dx)
        if xa >= xb:
            continue
        touch = fg[y0:yb, xa:xb] & fg[y0 + dy:yb + dy, xa + dx:xb + dx]
        first = touch.copy()
        first[:, 1:] &= ~touch[:, :-1]
        yy, xx = np.nonzero(first)
        yy += y0
        xx += xa
        ps.append(run[yy, xx])
        qs.append(run[yy + dy, xx + dx])
    return np.concatenate(ps), np.concatenate(qs)


def _compress(parent, nodes):
    """Point every node in ``nodes`` directly at its root."""
    while True:
        grand = parent[parent[nodes]]
        changed = grand != parent[nodes]
        if not changed.any():
            return
        parent[nodes] = grand


def _hook(parent, p, q, nodes):
    """Union all pairs (p, q); roots always point to smaller indices."""
    while p.size:
        rp, rq = parent[p], parent[q]
        differ = rp != rq
        if not differ.any():
            return
        p, q, rp, rq = p[differ], q[differ], rp[differ], rq[differ]
        np.minimum.at(parent, np.maximum(rp, rq), np.minimum(rp, rq))
        _compress(parent, nodes)


def label_components(mask, connectivity=8, backend=None):
    """Label a 2D boolean array; returns ``(labels int64, n)``.

    Ids follow the raster order of each component's first pixel.  Rows are
    split into bands that are labeled independently (in parallel on the
    parallel backend) and then stitched along the band seams.
    """
    fg = np.asarray(mask, dtype=bool)
    if fg.ndim != 2:
        raise ShapeError("labeling expects a single 2D plane")
    if connectivity not in _NEXT_ROW:
        raise ValueError("connectivity must be 4 or 8")
    h, w = fg.shape
    be = get_backend(backend)
    parent = np.arange(h * w, dtype=np.int64)
    run = np.empty((h, w), dtype=np.int64)
    bands = be.bands(h)

    def local(band):
        y0, y1 = band
        nodes = _run_starts(fg, y0, y1, run)
        # pairs leaving the band's last row are deferred to the seam pass
        p, q = _run_pairs(fg, run, y0, y1 - 1, connectivity)
        _hook(parent, p, q, nodes)
        return nodes

    nodes = be.map(local, bands)
    nodes = np.concatenate(nodes) if nodes else np.empty(0, np.int64)
    if len(bands) > 1:
        seam = [_run_pairs(fg, run, y1 - 1, y1, connectivity) for _, y1 in bands[:-1]]
        _hook(parent, np.concatenate([s[0] for s in seam]), np.concatenate([s[1] for s in seam]), nodes)
    roots = nodes[parent[nodes] == nodes]  # ascending flat index = raster order
    rank = np.zeros(h * w, dtype=np.int64)
    rank[roots] = np.arange(1, roots.size + 1)
    # background entries of ``run`` are -1 or stale; masked out by ``fg``
    labels = np.where(fg, rank[parent[run]], 0)
    return labels, int(roots.size)


def _plane(img):
    if img.depth != 1:
        raise ShapeError("operation supports 2D images only")
    return img.array[0]


@traced("connectedComponentsLabelingBox")
def connected_components_labeling_box(img: Image, backend=None) -> LabelMap:
    """8-connected components labeled ``1..n`` in raster order of first pixel."""
    plane = _plane(as_binary(img))
    labels, _ = label_components(plane == 1, 8, backend)
    return LabelMap._wrap(labels[np.newaxis].astype(np.float32))


@traced("binaryFillHoles")
def binary_fill_holes(img: Image, backend=None) -> BinaryImage:
    """Set every background pixel not 4-connected to the border to 1."""
    plane = _plane(as_binary(img))
    bg = plane == 0
    labels, _ = label_components(bg, 4, backend)
    border = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    outside = np.isin(labels, border[border > 0])
    return BinaryImage._wrap((~outside)[np.newaxis].astype(np.float32))


def _relabel(labels, keep, backend):
    """Map surviving ids to ``1..m`` in their original order; others to 0."""
    lut = np.zeros(keep.size, dtype=np.float32)
    survivors = np.flatnonzero(keep)
    survivors = survivors[survivors > 0]
    lut[survivors] = np.arange(1, survivors.size + 1)
    src = labels

    def kernel(out, y0, y1):
        out[:, y0:y1] = lut[src[:, y0:y1]]

    return LabelMap._wrap(get_backend(backend).run_rows(kernel, src.shape))


@traced("excludeLabelsOnEdges")
def exclude_labels_on_edges(img: Image, backend=None) -> LabelMap:
    """Erase labels touching the first/last row or column, then compact ids."""
    labels = as_labels(img).labels
    plane = labels[0] if labels.shape[0] == 1 else None
    if plane is None:
        raise ShapeError("operation supports 2D images only")
    n = int(labels.max()) if labels.size else 0
    keep = np.ones(n + 1, dtype=bool)
    keep[np.concatenate([plane[0], plane[-1], plane[:, 0], plane[:, -1]])] = False
    return _relabel(labels, keep, backend)


@traced("excludeLabelsOutsideSizeRange")
def exclude_labels_outside_size_range(img: Image, min_pixels, max_pixels, backend=None) -> LabelMap:
    """Erase labels whose pixel count lies outside ``[min_pixels, max_pixels]``."""
    rng = size_range(min_pixels, max_pixels)
    labels = as_labels(img).labels
    sizes = np.bincount(labels.reshape(-1))
    keep = (sizes >= rng.min_pixels) & (sizes <= rng.max_pixels)
    return _relabel(labels, keep, backend)


def canonical_labels(labels) -> np.ndarray:
    """Renumber any labeling so ids follow the raster order of first pixels."""
    labels = np.asarray(labels).astype(np.int64)
    ids, first = np.unique(labels.reshape(-1), return_index=True)
    fg = ids != 0
    ids, first = ids[fg], first[fg]
    lut = np.zeros(int(labels.max(initial=0)) + 1, dtype=np.int64)
    lut[ids[np.argsort(first)]] = np.arange(1, ids.size + 1)
    return lut[labels]
