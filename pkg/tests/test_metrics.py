import numpy as np
import pytest
from skimage.metrics import structural_similarity as skimage_ssim

from editplan import image_variance, luminance, ssim

from conftest import photo_like

C1 = 0.01**2


def reference_ssim(a, b):
    """Independent reference: scikit-image with the original SSIM settings,
    on the luminance channel."""
    return skimage_ssim(
        luminance(a), luminance(b), data_range=1.0,
        gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
    )


class TestSsim:
    def test_self_similarity_is_exactly_one(self, rng):
        img = rng.random((24, 24, 3))
        assert ssim(img, img) == 1.0

    def test_constant_images_closed_form(self):
        a = np.full((16, 16, 3), 0.5)
        b = np.full((16, 16, 3), 0.6)
        # Zero variances: contrast/structure term is 1, luminance term is
        # (2*0.5*0.6 + C1) / (0.5^2 + 0.6^2 + C1).
        expected = (2 * 0.5 * 0.6 + C1) / (0.5**2 + 0.6**2 + C1)
        assert ssim(a, b) == pytest.approx(expected, abs=1e-4)

    def test_inverted_image_low_similarity(self, rng):
        img = photo_like(rng, size=32, noise=0.08)
        assert ssim(img, 1.0 - img) < 0.1

    def test_against_reference_implementation(self, rng):
        for _ in range(5):
            a = photo_like(rng, size=32, noise=0.05)
            b = photo_like(rng, size=32, noise=0.05)
            assert ssim(a, b) == pytest.approx(reference_ssim(a, b), abs=5e-3)

    def test_symmetry(self, rng):
        a = photo_like(rng, size=24)
        b = photo_like(rng, size=24)
        assert abs(ssim(a, b) - ssim(b, a)) < 1e-9

    def test_upper_bound(self, rng):
        for _ in range(10):
            a = rng.random((16, 16, 3))
            b = rng.random((16, 16, 3))
            assert ssim(a, b) <= 1.0

    def test_too_small_image(self, rng):
        with pytest.raises(ValueError):
            ssim(rng.random((8, 8, 3)), rng.random((8, 8, 3)))

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValueError):
            ssim(rng.random((16, 16, 3)), rng.random((20, 20, 3)))


class TestImageVariance:
    def test_identical_images_zero(self, rng):
        # Power-of-two copy count keeps the elementwise mean exact.
        img = rng.random((8, 8, 3))
        assert image_variance([img.copy() for _ in range(4)]) == 0.0

    def test_two_constant_images(self):
        a = np.zeros((4, 4, 3))
        b = np.ones((4, 4, 3))
        # Population variance of {0, 1} is 0.25 at every element.
        assert image_variance([a, b]) == pytest.approx(0.25, abs=1e-15)

    def test_brute_force_oracle(self, rng):
        images = [rng.random((5, 6, 3)) for _ in range(10)]
        got = image_variance(images)
        stack = np.stack(images)
        total = 0.0
        for i in range(5):
            for j in range(6):
                for c in range(3):
                    vals = stack[:, i, j, c]
                    total += np.mean((vals - vals.mean()) ** 2)
        assert got == pytest.approx(total / (5 * 6 * 3), abs=1e-10)

    def test_order_invariant(self, rng):
        images = [rng.random((4, 4, 3)) for _ in range(5)]
        assert image_variance(images) == image_variance(images[::-1])

    def test_needs_two_images(self, rng):
        with pytest.raises(ValueError):
            image_variance([rng.random((4, 4, 3))])
