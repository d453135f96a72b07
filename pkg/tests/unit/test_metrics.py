"""Unit tests for SSIM and PSNR."""
import math

import numpy as np
import pytest

from spi_bench.errors import ShapeError
from spi_bench.metrics import SsimConstants, psnr, score_pair, ssim_global
from tests.utils import psnr_oracle, ssim_oracle


class TestPsnr:
    """Peak signal-to-noise ratio."""

    def test_identical_images_are_infinite(self) -> None:
        img = np.full((4, 4), 10.0)
        assert psnr(img, img) == math.inf

    def test_black_against_white_is_zero(self) -> None:
        assert psnr(np.zeros((4, 4)), np.full((4, 4), 255.0)) == pytest.approx(0.0, abs=1e-12)

    def test_tenth_of_peak_error_is_20_db(self) -> None:
        assert psnr(np.zeros((4, 4)), np.full((4, 4), 25.5)) == pytest.approx(20.0, abs=1e-12)

    def test_matches_formula_and_is_symmetric(self, rng) -> None:
        for _ in range(20):
            a = rng.uniform(0, 255, size=(8, 8))
            b = rng.uniform(0, 255, size=(8, 8))
            assert psnr(a, b) == pytest.approx(psnr_oracle(a, b), rel=1e-12)
            assert psnr(a, b) == pytest.approx(psnr(b, a), rel=1e-12)

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(ShapeError):
            psnr(np.zeros((4, 4)), np.zeros((8, 8)))


class TestSsim:
    """Global SSIM with its three factors."""

    def test_identical_images(self, rng) -> None:
        img = rng.uniform(0, 255, size=(8, 8))
        result = ssim_global(img, img)
        assert result.ssim == pytest.approx(1.0, abs=1e-12)
        assert result.luminance == pytest.approx(1.0, abs=1e-12)
        assert result.contrast == pytest.approx(1.0, abs=1e-12)
        assert result.structure == pytest.approx(1.0, abs=1e-12)

    def test_constant_shift_changes_luminance_only(self, rng) -> None:
        ref = rng.uniform(0, 200, size=(16, 16))
        result = ssim_global(ref, ref + 50)
        assert result.contrast == pytest.approx(1.0, abs=1e-12)
        assert result.structure == pytest.approx(1.0, abs=1e-12)
        assert result.luminance < 1.0

    def test_matches_formula_oracle(self, rng) -> None:
        for _ in range(20):
            a = rng.uniform(0, 255, size=(8, 8))
            b = rng.uniform(0, 255, size=(8, 8))
            result = ssim_global(a, b)._asdict()
            for name, expected in ssim_oracle(a, b).items():
                assert result[name] == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_symmetry_and_range(self, rng) -> None:
        for _ in range(1000):
            a = rng.uniform(0, 255, size=(8, 8))
            b = rng.uniform(0, 255, size=(8, 8))
            forward = ssim_global(a, b)
            backward = ssim_global(b, a)
            assert forward.ssim == pytest.approx(backward.ssim, rel=1e-12, abs=1e-15)
            assert 0 < forward.luminance <= 1 + 1e-12
            assert 0 < forward.contrast <= 1 + 1e-12
            assert -1 - 1e-12 <= forward.structure <= 1 + 1e-12
            assert forward.ssim <= 1 + 1e-12

    def test_population_statistics(self) -> None:
        ref = np.array([[0.0, 255.0], [0.0, 255.0]])
        test = np.array([[255.0, 0.0], [255.0, 0.0]])
        # population sigma = 127.5, covariance = -127.5**2
        c3 = 7.65 ** 2 / 2
        expected = (-127.5 ** 2 + c3) / (127.5 ** 2 + c3)
        assert ssim_global(ref, test).structure == pytest.approx(expected, rel=1e-12)

    def test_custom_constants(self, rng) -> None:
        a = rng.uniform(0, 255, size=(8, 8))
        b = rng.uniform(0, 255, size=(8, 8))
        squared = ssim_global(a, b, SsimConstants(alpha=2.0))
        plain = ssim_global(a, b)
        assert squared.ssim == pytest.approx(plain.luminance ** 2 * plain.contrast * plain.structure, rel=1e-12)

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(ShapeError):
            ssim_global(np.zeros((4, 4)), np.zeros((4, 5)))


def test_score_pair_combines_both_metrics(rng) -> None:
    a = rng.uniform(0, 255, size=(8, 8))
    b = np.clip(a + rng.normal(0, 5, size=(8, 8)), 0, 255)
    score = score_pair(a, b)
    assert score.ssim == ssim_global(a, b).ssim
    assert score.psnr == psnr(a, b)
