import math

import numpy as np
import pytest

from freqedit.metrics import hf_ratio, l1, measure, psnr, ssim
from freqedit.wavelet import db4_filters, dwt2, idwt2

BANK = db4_filters()


def rand_image(seed, shape=(16, 16, 3)):
    return np.clip(np.random.default_rng(seed).standard_normal(shape) * 0.15 + 0.5, 0, 1)


class TestPsnr:
    def test_identical_is_inf(self):
        a = rand_image(0)
        assert math.isinf(psnr(a, a))

    def test_uniform_offset_golden(self):
        # mse = 0.01 -> 10*log10(1/0.01) = 20 dB exactly
        a = np.full((8, 8, 1), 0.5)
        b = np.full((8, 8, 1), 0.6)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_symmetry(self):
        a, b = rand_image(1), rand_image(2)
        assert psnr(a, b) == psnr(b, a)

    def test_monotone_in_error(self):
        a = rand_image(3)
        assert psnr(a, a + 0.01) > psnr(a, a + 0.05)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            psnr(np.zeros((8, 8, 1)), np.zeros((8, 8, 3)))


class TestL1:
    def test_identical(self):
        a = rand_image(4)
        assert l1(a, a) == 0.0

    def test_uniform_offset(self):
        a = np.full((4, 4, 2), 0.2)
        assert l1(a, a + 0.3) == pytest.approx(0.3, abs=1e-15)

    def test_hand_values(self):
        a = np.array([0.0, 1.0]).reshape(1, 2, 1)
        b = np.array([0.5, 0.5]).reshape(1, 2, 1)
        assert l1(a, b) == pytest.approx(0.5, abs=0)


class TestSsim:
    def test_self_is_exactly_one(self):
        a = rand_image(5)
        assert ssim(a, a) == 1.0

    def test_constant_pair_closed_form(self):
        p, q = 0.5, 0.6
        c1 = 0.01 ** 2
        expected = (2 * p * q + c1) / (p * p + q * q + c1)
        a = np.full((16, 16, 1), p)
        b = np.full((16, 16, 1), q)
        assert ssim(a, b) == pytest.approx(expected, abs=1e-9)

    def test_symmetry(self):
        a, b = rand_image(6), rand_image(7)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_bounded_above(self):
        a, b = rand_image(8), rand_image(9)
        assert ssim(a, b) < 1.0

    def test_degrades_with_noise(self):
        a = rand_image(10)
        rng = np.random.default_rng(11)
        small = np.clip(a + 0.02 * rng.standard_normal(a.shape), 0, 1)
        large = np.clip(a + 0.2 * rng.standard_normal(a.shape), 0, 1)
        assert ssim(a, small) > ssim(a, large)

    def test_too_small(self):
        with pytest.raises(ValueError, match="window"):
            ssim(np.zeros((8, 8, 1)), np.zeros((8, 8, 1)))


def scale_details(g, gamma):
    p = dwt2(g, BANK)
    scaled = type(p)(ll2=p.ll2,
                     d2=tuple(gamma * b for b in p.d2),
                     d1=tuple(gamma * b for b in p.d1))
    return idwt2(scaled, BANK)


class TestHfRatio:
    def test_self_is_one(self):
        a = rand_image(12)
        assert hf_ratio(a, a, BANK) == pytest.approx(1.0, abs=1e-12)

    def test_detail_scaling_golden(self):
        a = rand_image(13)
        assert hf_ratio(scale_details(a, 0.7), a, BANK) == pytest.approx(0.7, abs=1e-6)

    def test_multiplicative_across_chain(self):
        a = rand_image(14)
        b = scale_details(a, 0.8)
        c = scale_details(b, 0.6)
        combined = hf_ratio(b, a, BANK) * hf_ratio(c, b, BANK)
        assert hf_ratio(c, a, BANK) == pytest.approx(combined, rel=1e-9)

    def test_zero_detail_reference(self):
        with pytest.raises(ValueError, match="zero detail"):
            hf_ratio(rand_image(15, (16, 16, 1)), np.zeros((16, 16, 1)), BANK)


class TestMeasure:
    def test_fields_match_individual_metrics(self):
        a, ref = rand_image(16), rand_image(17)
        m = measure(a, ref, BANK)
        assert m.psnr_db == psnr(a, ref)
        assert m.ssim == ssim(a, ref)
        assert m.l1 == l1(a, ref)
        assert m.hf_ratio == hf_ratio(a, ref, BANK)
