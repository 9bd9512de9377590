import numpy as np
import pytest

from freqedit import wavelet
from freqedit.grids import (avg_pool2, bilateral_filter, channel_l2_map, combine,
                            gaussian_blur, load_png, minmax_invert, save_png, unsharp_mask)


def rand_grid(seed, shape=(8, 8, 3)):
    return np.random.default_rng(seed).standard_normal(shape)


class TestCombine:
    def test_self_cancellation(self):
        a = rand_grid(0)
        assert np.array_equal(combine(a, a, 1.0, -1.0), np.zeros_like(a))

    def test_zero_operand(self):
        a = rand_grid(1)
        out = combine(a, np.zeros_like(a), 2.0, 5.0)
        np.testing.assert_array_equal(out, 2.0 * a)

    def test_hand_arithmetic(self):
        a = np.array([1.0, 2.0]).reshape(1, 2, 1)
        b = np.array([10.0, 20.0]).reshape(1, 2, 1)
        out = combine(a, b, 0.5, 0.1)
        np.testing.assert_allclose(out.ravel(), [1.5, 3.0], rtol=0, atol=0)

    def test_linearity(self):
        a, b = rand_grid(2), rand_grid(3)
        lhs = combine(a, b, 0.3, -0.8) + combine(a, b, 1.1, 0.4)
        rhs = combine(a, b, 0.3 + 1.1, -0.8 + 0.4)
        np.testing.assert_allclose(lhs, rhs, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            combine(rand_grid(0, (8, 8, 3)), rand_grid(0, (4, 4, 3)), 1.0, 1.0)


class TestChannelL2Map:
    def test_zero_grid(self):
        assert np.array_equal(channel_l2_map(np.zeros((4, 4, 3))), np.zeros((4, 4)))

    def test_pythagorean(self):
        g = np.array([3.0, 4.0]).reshape(1, 1, 2)
        assert channel_l2_map(g)[0, 0] == pytest.approx(5.0, abs=0)

    def test_single_channel_abs(self):
        g = rand_grid(4, (6, 6, 1))
        np.testing.assert_allclose(channel_l2_map(g), np.abs(g[:, :, 0]), atol=1e-15)

    def test_nonneg_and_zero_iff(self):
        g = rand_grid(5)
        g[2, 3, :] = 0.0
        m = channel_l2_map(g)
        assert np.all(m >= 0)
        assert m[2, 3] == 0.0
        assert np.count_nonzero(m == 0.0) == 1


class TestMinmaxInvert:
    def test_direct_evaluation(self):
        m = np.array([[1.0, 3.0, 5.0]])
        np.testing.assert_allclose(minmax_invert(m), [[1.0, 0.5, 0.0]], atol=0)

    def test_constant_map_degenerate(self):
        np.testing.assert_array_equal(minmax_invert(np.full((3, 3), 0.7)), np.ones((3, 3)))

    def test_endpoints(self):
        np.testing.assert_array_equal(minmax_invert(np.array([[0.0, 1.0]])), [[1.0, 0.0]])

    def test_range_and_monotone(self):
        m = np.random.default_rng(6).random((10, 10))
        out = minmax_invert(m)
        assert np.all((out >= 0.0) & (out <= 1.0))
        flat_m, flat_o = m.ravel(), out.ravel()
        order = np.argsort(flat_m)
        assert np.all(np.diff(flat_o[order]) <= 0)

    def test_bad_eps(self):
        with pytest.raises(ValueError, match="eps"):
            minmax_invert(np.ones((2, 2)), eps=0.0)


class TestAvgPool2:
    def test_constant(self):
        out = avg_pool2(np.full((8, 8), 0.3), 4)
        np.testing.assert_allclose(out, np.full((2, 2), 0.3), atol=1e-15)

    def test_block_mean(self):
        m = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert avg_pool2(m, 2)[0, 0] == 0.5

    def test_identity(self):
        m = np.random.default_rng(7).random((6, 6))
        np.testing.assert_array_equal(avg_pool2(m, 1), m)

    def test_indivisible(self):
        with pytest.raises(ValueError, match="divisible"):
            avg_pool2(np.zeros((6, 6)), 4)


class TestFilters:
    def test_constants_preserved(self):
        c = np.full((16, 16, 3), 0.4)
        for out in (gaussian_blur(c, 2.0), unsharp_mask(c), bilateral_filter(c)):
            np.testing.assert_allclose(out, c, atol=1e-12)

    def test_unsharp_zero_amount_identity(self):
        g = np.clip(rand_grid(8, (16, 16, 3)) * 0.1 + 0.5, 0, 1)
        np.testing.assert_allclose(unsharp_mask(g, amount=0.0), g, atol=1e-15)

    def test_gaussian_mean_preserved(self):
        g = np.clip(rand_grid(9, (16, 16, 3)) * 0.1 + 0.5, 0, 1)
        out = gaussian_blur(g, 1.3)
        assert abs(out.mean() - g.mean()) / abs(g.mean()) < 1e-9

    def test_band_energy_ordering(self):
        # fixed checkerboard-plus-noise image, energies via the wavelet module
        rng = np.random.default_rng(10)
        yy, xx = np.mgrid[0:16, 0:16]
        checker = np.where((yy // 2 + xx // 2) % 2 == 0, 0.4, 0.6)
        g = np.clip(checker[:, :, None] + 0.05 * rng.standard_normal((16, 16, 3)), 0, 1)
        bank = wavelet.db4_filters()
        e = wavelet.hf_energy(g, bank)
        assert wavelet.hf_energy(unsharp_mask(g), bank) > e
        assert wavelet.hf_energy(bilateral_filter(g), bank) < e

    def test_parameter_validation(self):
        g = np.full((8, 8, 3), 0.5)
        with pytest.raises(ValueError):
            gaussian_blur(g, 0.0)
        with pytest.raises(ValueError):
            unsharp_mask(g, amount=-1.0)
        with pytest.raises(ValueError):
            bilateral_filter(g, sigma_r=0.0)


class TestPng:
    def test_round_trip(self, tmp_path):
        g = np.round(np.random.default_rng(11).random((8, 8, 3)) * 255) / 255
        path = tmp_path / "g.png"
        save_png(path, g)
        np.testing.assert_allclose(load_png(path), g, atol=1e-12)

    def test_grayscale(self, tmp_path):
        g = np.round(np.random.default_rng(12).random((8, 8, 1)) * 255) / 255
        path = tmp_path / "g.png"
        save_png(path, g)
        loaded = load_png(path)
        assert loaded.shape == (8, 8, 1)
        np.testing.assert_allclose(loaded, g, atol=1e-12)
