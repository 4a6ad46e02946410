import numpy as np
import pytest

from workzone.kernels import BACKEND, _fallback, gaussian_kernel1d, invert_affine

try:
    from workzone.kernels import _core
except ImportError:
    _core = None

needs_ext = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def rand_img(rng, h=41, w=37):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def test_backend_selected():
    assert BACKEND in ("compiled", "fallback")


class TestKernel1d:
    def test_normalized_and_symmetric(self):
        for sigma in (0.3, 1.0, 2.7):
            k = gaussian_kernel1d(sigma)
            assert k.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.allclose(k, k[::-1])
            assert len(k) == 2 * int(np.ceil(3 * sigma)) + 1

    def test_radius_rule(self):
        assert len(gaussian_kernel1d(1.0)) == 7
        assert len(gaussian_kernel1d(3.0)) == 19


class TestInvertAffine:
    def test_inverse_composes_to_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            fwd = np.array(
                [
                    [rng.uniform(0.5, 2), rng.uniform(-0.5, 0.5), rng.uniform(-10, 10)],
                    [rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2), rng.uniform(-10, 10)],
                ]
            )
            inv = invert_affine(fwd)
            a = np.vstack([fwd, [0, 0, 1]])
            b = np.vstack([inv, [0, 0, 1]])
            assert np.allclose(a @ b, np.eye(3), atol=1e-9)

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            invert_affine(np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]]))


class TestFallbackSemantics:
    def test_blur_constant_invariant(self):
        img = np.full((20, 30, 3), 77, dtype=np.uint8)
        assert np.array_equal(_fallback.gaussian_blur(img, 2.0), img)

    def test_blur_preserves_mean_roughly(self):
        rng = np.random.default_rng(9)
        img = rand_img(rng)
        out = _fallback.gaussian_blur(img, 1.5)
        assert abs(float(out.mean()) - float(img.mean())) < 1.0

    def test_warp_identity(self):
        rng = np.random.default_rng(10)
        img = rand_img(rng)
        inv = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert np.array_equal(_fallback.warp_affine(img, inv, (114, 114, 114)), img)

    def test_warp_pure_translation_fills(self):
        img = np.full((4, 4, 3), 200, dtype=np.uint8)
        # output pixel (x,y) samples source (x-2, y): left 2 columns filled
        inv = np.array([[1.0, 0.0, -2.0], [0.0, 1.0, 0.0]])
        out = _fallback.warp_affine(img, inv, (1, 2, 3))
        assert out[0, 0].tolist() == [1, 2, 3]
        assert out[0, 2].tolist() == [200, 200, 200]

    def test_hsv_adjust_identity(self):
        rng = np.random.default_rng(11)
        img = rand_img(rng)
        assert np.array_equal(_fallback.hsv_adjust(img, 1.0, 0.0), img)

    def test_hsv_adjust_desaturate(self):
        img = np.array([[[200, 50, 50]]], dtype=np.uint8)
        out = _fallback.hsv_adjust(img, 0.0, 0.0)
        assert out[0, 0, 0] == out[0, 0, 1] == out[0, 0, 2] == 200


@needs_ext
class TestBackendParity:
    """The two implementations must agree bit for bit."""

    def test_blur_parity(self):
        rng = np.random.default_rng(21)
        for sigma in (0.4, 1.0, 2.3, 3.0):
            img = rand_img(rng, h=int(rng.integers(8, 70)), w=int(rng.integers(8, 70)))
            a = _fallback.gaussian_blur(img, sigma)
            b = _core.gaussian_blur(img, sigma)
            assert np.array_equal(a, b), f"blur diverges at sigma={sigma}"

    def test_warp_parity(self):
        rng = np.random.default_rng(22)
        for _ in range(12):
            img = rand_img(rng, h=int(rng.integers(8, 70)), w=int(rng.integers(8, 70)))
            fwd = np.array(
                [
                    [rng.uniform(0.6, 1.6), rng.uniform(-0.4, 0.4), rng.uniform(-8, 8)],
                    [rng.uniform(-0.4, 0.4), rng.uniform(0.6, 1.6), rng.uniform(-8, 8)],
                ]
            )
            inv = invert_affine(fwd)
            a = _fallback.warp_affine(img, inv, (114, 114, 114))
            b = _core.warp_affine(img, inv, (114, 114, 114))
            assert np.array_equal(a, b)

    def test_hsv_parity(self):
        rng = np.random.default_rng(23)
        for sat, hue in ((0.0, 0.0), (0.5, 90.0), (1.0, 180.0), (2.5, 351.5), (1.3, -30.0)):
            img = rand_img(rng)
            a = _fallback.hsv_adjust(img, sat, hue)
            b = _core.hsv_adjust(img, sat, hue)
            assert np.array_equal(a, b), f"hsv diverges at ({sat}, {hue})"
