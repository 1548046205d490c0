import numpy as np
import pytest

from granops.backend import Backend
from granops.errors import DomainError, EmptyInputError, InvalidRangeError
from granops.image import BinaryImage, Histogram, Image, LabelMap, histogram256
from granops.labeling import (binary_fill_holes, canonical_labels, connected_components_labeling_box,
                              exclude_labels_on_edges, exclude_labels_outside_size_range, label_components,
                              otsu_bin_index, otsu_threshold_value, size_range, threshold_otsu)

from oracles import fill_holes_oracle, flood_fill_labels, otsu_oracle


def _mask(rng, h, w, density):
    return (rng.random((h, w)) < density).astype(np.float32)


@pytest.mark.parametrize("connectivity", [4, 8])
def test_label_components_matches_flood_fill(rng, connectivity):
    for _ in range(150):
        h, w = rng.integers(1, 20, size=2)
        m = _mask(rng, h, w, rng.uniform(0.1, 0.9))
        labels, n = label_components(m > 0, connectivity)
        expect, n_expect = flood_fill_labels(m, connectivity)
        assert n == n_expect
        assert np.array_equal(labels, expect)


def test_ccl_known_shapes():
    m = BinaryImage([[1, 0, 1],
                     [0, 1, 0],
                     [1, 0, 0]])
    out = connected_components_labeling_box(m)
    assert isinstance(out, LabelMap) and out.n_labels == 1
    m2 = BinaryImage([[1, 1, 0, 1],
                      [0, 0, 0, 1],
                      [1, 0, 0, 0]])
    assert connected_components_labeling_box(m2).plane.tolist() == [[1, 1, 0, 2], [0, 0, 0, 2], [3, 0, 0, 0]]


def test_ccl_u_shape_merges_late():
    # two arms that only meet at the bottom row: ids must still be contiguous
    m = np.zeros((6, 7), np.float32)
    m[:, 0] = m[:, 6] = m[5, :] = 1
    m[0, 3] = 1
    out = connected_components_labeling_box(BinaryImage(m)).plane
    assert out[0, 0] == out[0, 6] == 1 and out[0, 3] == 2


def test_ccl_rejects_non_binary():
    with pytest.raises(DomainError):
        connected_components_labeling_box(Image([[0, 2]]))


def test_ccl_banded_equals_single_band(rng):
    for threads in (1, 2, 3):
        par = Backend("parallel", threads=threads)
        for _ in range(20):
            m = BinaryImage(_mask(rng, 41, 23, 0.5))
            assert connected_components_labeling_box(m) == connected_components_labeling_box(m, backend=par)


def test_canonical_labels_renumbers_by_first_pixel():
    lab = np.array([[5, 5, 0], [0, 2, 0], [9, 0, 0]])
    assert canonical_labels(lab).tolist() == [[1, 1, 0], [0, 2, 0], [3, 0, 0]]


def test_fill_holes_matches_oracle(rng):
    for _ in range(100):
        h, w = rng.integers(1, 16, size=2)
        m = _mask(rng, h, w, rng.uniform(0.3, 0.8))
        out = binary_fill_holes(BinaryImage(m))
        assert np.array_equal(out.plane.astype(bool), fill_holes_oracle(m))


def test_fill_holes_ring():
    m = np.zeros((7, 7), np.float32)
    m[1:6, 1:6] = 1
    m[3, 3] = 0
    assert binary_fill_holes(BinaryImage(m)).plane[3, 3] == 1
    # a diagonal gap does not connect background under 4-connectivity
    d = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], np.float32)
    assert binary_fill_holes(BinaryImage(d)).plane[1, 1] == 1


def test_exclude_on_edges():
    lab = LabelMap([[1, 0, 0, 0],
                    [0, 0, 2, 0],
                    [0, 0, 0, 0],
                    [3, 3, 0, 4]])
    assert exclude_labels_on_edges(lab).plane.tolist() == [[0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]]


def test_exclude_size_range_inclusive_and_renumbered():
    lab = LabelMap([[1, 1, 0, 2],
                    [0, 0, 0, 2],
                    [3, 3, 3, 2]])
    out = exclude_labels_outside_size_range(lab, 3, 3)
    assert out.plane.tolist() == [[0, 0, 0, 1], [0, 0, 0, 1], [2, 2, 2, 1]]
    assert exclude_labels_outside_size_range(lab, 0, float("inf")) == lab
    with pytest.raises(InvalidRangeError):
        size_range(5, 4)


def test_otsu_bin_index_matches_rational_oracle(rng):
    for _ in range(100):
        counts = rng.integers(0, 50, size=256) * (rng.random(256) < 0.3)
        if counts.sum() == 0:
            counts[7] = 1
        assert otsu_bin_index(counts) == otsu_oracle(counts)


def test_otsu_bimodal_and_degenerate():
    counts = np.zeros(256, np.int64)
    counts[10] = counts[200] = 100
    assert otsu_bin_index(counts) == 10
    with pytest.raises(EmptyInputError):
        otsu_bin_index(np.zeros(256))
    h = Histogram(np.r_[5, np.zeros(255, np.int64)], 3.0, 3.0)
    assert otsu_threshold_value(h) == (3.0, 0)


def test_threshold_otsu_on_integer_levels():
    img = Image(np.array([[0, 0, 0, 255, 255, 255, 128, 127]], np.float32))
    out = threshold_otsu(img)
    assert isinstance(out, BinaryImage)
    # every level above the split is foreground, every level at or below is not
    res = otsu_threshold_value(histogram256(img))
    assert np.array_equal(out.plane, (img.plane > res.threshold_value).astype(np.float32))
    assert res.bin_index < res.threshold_value < res.bin_index + 1


def test_threshold_constant_image_is_empty():
    assert threshold_otsu(Image(np.full((4, 4), 9.0))).plane.sum() == 0
