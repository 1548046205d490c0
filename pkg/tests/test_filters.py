import numpy as np
import pytest

from granops.backend import Backend
from granops.errors import DomainError, ShapeError
from granops.filters import (gaussian_blur_2d, gaussian_weights, greater_constant, maximum_box, mean_box,
                             minimum_box, subtract_images, top_hat_box)
from granops.image import BinaryImage, Image

from oracles import box_filter_oracle, gaussian_oracle


def _img(rng, shape):
    return Image(rng.integers(0, 100, size=shape).astype(np.float32) + rng.random(shape).astype(np.float32))


@pytest.mark.parametrize("shape", [(1, 7, 9), (3, 5, 6), (1, 1, 4), (2, 6, 1)])
@pytest.mark.parametrize("r", [(0, 0, 0), (1, 2, 0), (2, 1, 1), (3, 3, 2)])
def test_min_max_match_oracle(rng, shape, r):
    img = _img(rng, shape)
    assert np.array_equal(minimum_box(img, *r).array, box_filter_oracle(img.array, *r, np.min).astype(np.float32))
    assert np.array_equal(maximum_box(img, *r).array, box_filter_oracle(img.array, *r, np.max).astype(np.float32))


@pytest.mark.parametrize("r", [(1, 1, 0), (2, 0, 1), (0, 3, 0)])
def test_mean_matches_oracle(rng, r):
    img = _img(rng, (2, 8, 7))
    expect = box_filter_oracle(img.array, *r, np.mean)
    np.testing.assert_allclose(mean_box(img, *r).array, expect, rtol=2e-7, atol=1e-5)


def test_mean_of_constant_is_exact():
    img = Image(np.full((3, 9, 9), 0.1, dtype=np.float32))
    assert np.array_equal(mean_box(img, 2, 2, 1).array, img.array)


@pytest.mark.parametrize("sigma", [(0.5, 0.5), (1.5, 1.5), (2.0, 0.7), (0, 1.2)])
def test_gaussian_matches_direct_convolution(rng, sigma):
    img = _img(rng, (1, 20, 17))
    expect = gaussian_oracle(img.plane, *sigma)
    np.testing.assert_allclose(gaussian_blur_2d(img, *sigma).plane, expect, rtol=1e-6, atol=1e-4)


def test_gaussian_weights():
    w = gaussian_weights(1.5)
    assert len(w) == 2 * 5 + 1 and abs(w.sum() - 1) < 1e-15
    assert np.array_equal(gaussian_weights(0), [1.0])
    with pytest.raises(DomainError):
        gaussian_weights(-1)


def test_gaussian_zero_sigma_is_identity(rng):
    img = _img(rng, (1, 6, 6))
    assert gaussian_blur_2d(img, 0, 0) == img


def test_gaussian_preserves_constant():
    img = Image(np.full((1, 12, 12), 3.0))
    np.testing.assert_allclose(gaussian_blur_2d(img, 2.0).plane, 3.0, rtol=1e-6)


@pytest.mark.parametrize("bad", [-1, 1.5])
def test_radius_validation(bad):
    with pytest.raises(DomainError):
        minimum_box(Image(np.zeros((3, 3))), bad, 1)


def test_binary_type_preserved():
    m = BinaryImage([[0, 1, 0], [0, 0, 0]])
    assert isinstance(maximum_box(m, 1, 1), BinaryImage)
    assert maximum_box(m, 1, 1).plane.sum() == 6


def test_subtract_and_shape_error(rng):
    a, b = _img(rng, (1, 4, 4)), _img(rng, (1, 4, 4))
    assert np.array_equal(subtract_images(a, b).array, a.array - b.array)
    with pytest.raises(ShapeError):
        subtract_images(a, _img(rng, (1, 4, 5)))


def test_greater_constant_strict_and_exact():
    img = Image([[0.0, 0.5, 1.0, 0.1]])
    out = greater_constant(img, 0.5)
    assert isinstance(out, BinaryImage)
    assert out.plane.tolist() == [[0, 0, 1, 0]]
    # 0.1 as float32 is slightly above the double 0.1
    assert greater_constant(img, 0.1).plane.tolist() == [[0, 1, 1, 1]]


def test_top_hat_is_composition(rng):
    img = _img(rng, (1, 15, 13))
    opening = maximum_box(minimum_box(img, 2, 1), 2, 1)
    assert np.array_equal(top_hat_box(img, 2, 1).array, img.array - opening.array)


@pytest.mark.parametrize("threads", [1, 2, 3])
def test_parallel_bands_are_bit_identical(rng, threads):
    img = _img(rng, (2, 37, 11))
    par = Backend("parallel", threads=threads)
    for fn, args in ((gaussian_blur_2d, (1.3, 2.1)), (mean_box, (2, 3, 1)), (minimum_box, (1, 4, 1)),
                     (top_hat_box, (2, 2, 0))):
        assert fn(img, *args) == fn(img, *args, backend=par)
