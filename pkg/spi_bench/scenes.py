"""
Bundled test scenes.

The classic cameraman photograph and the coffee-cup photograph shipped
with scikit-image, reduced to gray with the luma weights and resampled to
the requested side the same way loaded images are.
"""
from pathlib import Path
from typing import Callable, Dict, List, Union
import logging

import numpy as np
from PIL import Image
from skimage import data

from spi_bench.errors import ConfigurationError
from spi_bench.hadamard_core import GrayImage
from spi_bench.utils.image_utils import resample_square, rgb_to_gray

logger = logging.getLogger(__name__)

SCENES: Dict[str, Callable[[], np.ndarray]] = {
    "cameraman": data.camera,
    "coffee": data.coffee,
}


def make_scene(name: str, side: int) -> GrayImage:
    """
    Render a bundled scene.

    Args:
        name: "cameraman" or "coffee"
        side: Output side in pixels (>= 8)

    Returns:
        side x side float image with integer intensities in [0, 255]

    Raises:
        ConfigurationError: Unknown scene or side too small
    """
    if name not in SCENES:
        raise ConfigurationError(f"Unknown scene {name!r}; expected one of {sorted(SCENES)}")
    if side < 8:
        raise ConfigurationError(f"Scene side must be at least 8, got {side}")
    pixels = SCENES[name]()
    gray = rgb_to_gray(pixels) if pixels.ndim == 3 else pixels.astype(np.float64)
    return np.round(resample_square(gray, side))


def write_scenes(directory: Union[str, Path], side: int) -> List[Path]:
    """Write every bundled scene as an 8-bit grayscale PNG."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(SCENES):
        path = directory / f"{name}.png"
        Image.fromarray(make_scene(name, side).astype(np.uint8)).save(path)
        written.append(path)
    logger.info("Wrote %d scenes at %dx%d to %s", len(written), side, side, directory)
    return written
