import numpy as np
import pytest

from granops.errors import DomainError, InvalidDimensionError, ShapeError
from granops.image import (BinaryImage, Histogram, Image, LabelMap, TimeLapse, as_binary, bin_indices,
                           histogram256, make_image)


def test_2d_promotes_to_single_plane():
    img = Image(np.arange(6).reshape(2, 3))
    assert img.shape == (1, 2, 3)
    assert (img.width, img.height, img.depth) == (3, 2, 1)
    assert img.nbytes == 24
    assert img.array.dtype == np.float32


def test_image_is_immutable_and_copies_input():
    src = np.zeros((2, 2))
    img = Image(src)
    src[0, 0] = 5
    assert img.array[0, 0, 0] == 0
    with pytest.raises(ValueError):
        img.array[0, 0, 0] = 1


@pytest.mark.parametrize("bad", [np.zeros(3), np.zeros((1, 1, 1, 1)), np.zeros((0, 3))])
def test_bad_dimensions(bad):
    with pytest.raises(InvalidDimensionError):
        Image(bad)


def test_non_finite_rejected():
    with pytest.raises(DomainError):
        Image([[np.nan, 0]])


def test_subtypes_validate():
    BinaryImage([[0, 1]])
    with pytest.raises(DomainError):
        BinaryImage([[0, 2]])
    with pytest.raises(DomainError):
        LabelMap([[0.5]])
    assert LabelMap([[0, 3], [1, 0]]).n_labels == 3
    assert isinstance(as_binary(Image([[1, 0]])), BinaryImage)
    with pytest.raises(DomainError):
        as_binary(Image([[0.5]]))


def test_plane_of_3d_raises():
    with pytest.raises(ShapeError):
        make_image(2, 2, depth=2).plane


def test_uint16_converts_losslessly():
    arr = np.arange(65536, dtype=np.uint16).reshape(256, 256)
    assert np.array_equal(Image(arr).plane.astype(np.uint16), arr)


def test_histogram_binning_rule():
    img = Image(np.arange(256, dtype=np.float32).reshape(16, 16))
    h = histogram256(img)
    assert (h.lo, h.hi, h.total) == (0.0, 255.0, 256)
    assert np.all(h.bins == 1)
    # the maximum lands in the last bin, not past it
    assert bin_indices(np.array([0.0, 10.0]), 0.0, 10.0).tolist() == [0, 255]


def test_histogram_constant_image():
    h = histogram256(make_image(3, 3, fill=7))
    assert h.bins[0] == 9 and h.lo == h.hi == 7


def test_timelapse_roundtrip_and_index_errors():
    arr = np.random.default_rng(0).random((3, 2, 4, 5)).astype(np.float32)
    tl = TimeLapse.from_array(arr)
    assert (tl.n_frames, tl.n_channels, tl.width, tl.height) == (3, 2, 5, 4)
    assert np.array_equal(tl.to_array(), arr)
    assert tl == TimeLapse.from_array(arr)
    with pytest.raises(IndexError):
        tl.get(3, 0)
    with pytest.raises(IndexError):
        tl.get(0, 2)
