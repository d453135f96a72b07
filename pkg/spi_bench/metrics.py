"""
Full-reference quality metrics on the 0..255 intensity scale.

SSIM here is the global form: one window covering the whole image, with the
luminance, contrast and structure factors built from whole-image means,
population standard deviations and covariance.
"""
from typing import NamedTuple
import logging
import math

import numpy as np
from skimage.metrics import mean_squared_error

from spi_bench.errors import ShapeError

logger = logging.getLogger(__name__)

PEAK_INTENSITY = 255.0


class SsimConstants(NamedTuple):
    C1: float = 2.55 ** 2
    C2: float = 7.65 ** 2
    C3: float = 7.65 ** 2 / 2
    alpha: float = 1.0
    beta_exp: float = 1.0
    gamma: float = 1.0


class SsimComponents(NamedTuple):
    ssim: float
    luminance: float
    contrast: float
    structure: float


class PairScore(NamedTuple):
    ssim: float
    psnr: float


DEFAULT_CONSTANTS = SsimConstants()


def _pair(ref, test):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ShapeError(f"Image shapes differ: {ref.shape} vs {test.shape}")
    if ref.size == 0:
        raise ShapeError("Cannot score empty images")
    return ref, test


def psnr(ref, test) -> float:
    """
    Peak signal-to-noise ratio in dB for 8-bit intensities.

    Returns:
        10*log10(255**2 / MSE), or math.inf when the images are identical
    """
    ref, test = _pair(ref, test)
    mse = mean_squared_error(ref, test)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(PEAK_INTENSITY ** 2 / mse))


def ssim_global(ref, test, k: SsimConstants = DEFAULT_CONSTANTS) -> SsimComponents:
    """
    Global SSIM and its three factors.

    Args:
        ref: Reference image
        test: Image under test, same shape
        k: Stabilizing constants and factor exponents

    Returns:
        SsimComponents(ssim, luminance, contrast, structure)

    Raises:
        ShapeError: If the images differ in shape
    """
    ref, test = _pair(ref, test)
    mu_r = ref.mean()
    mu_t = test.mean()
    sigma_r = ref.std()
    sigma_t = test.std()
    covariance = np.mean((ref - mu_r) * (test - mu_t))

    luminance = (2 * mu_r * mu_t + k.C1) / (mu_r ** 2 + mu_t ** 2 + k.C1)
    contrast = (2 * sigma_r * sigma_t + k.C2) / (sigma_r ** 2 + sigma_t ** 2 + k.C2)
    structure = (covariance + k.C3) / (sigma_r * sigma_t + k.C3)

    # a negative structure factor has no real fractional power
    value = (
        np.sign(luminance) * abs(luminance) ** k.alpha
        * np.sign(contrast) * abs(contrast) ** k.beta_exp
        * np.sign(structure) * abs(structure) ** k.gamma
    )
    return SsimComponents(float(value), float(luminance), float(contrast), float(structure))


def score_pair(ref, test) -> PairScore:
    return PairScore(ssim=ssim_global(ref, test).ssim, psnr=psnr(ref, test))
