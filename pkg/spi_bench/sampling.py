"""
Simulated single-pixel acquisition: row selection, projection and the
proportional Gaussian noise model y_s = y + c * mean(|y|) * sigma.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Union
import hashlib
import logging
import math

import numpy as np
import pandas as pd

from spi_bench.errors import ConfigurationError, ShapeError
from spi_bench.hadamard_core import HadamardMatrix, flatten_image, fwht
from spi_bench.orderings import RowOrdering
from spi_bench.schemas.experiment import SensingConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasurementSet:
    """Clean and noisy projections with the natural row indices that made them."""
    y: np.ndarray
    y_noisy: np.ndarray
    row_indices: np.ndarray

    def __post_init__(self):
        if not (len(self.y) == len(self.y_noisy) == len(self.row_indices)):
            raise ShapeError(
                "Measurement vectors and row indices must have equal length, got "
                f"{len(self.y)}, {len(self.y_noisy)}, {len(self.row_indices)}"
            )

    @property
    def count(self) -> int:
        return len(self.row_indices)


def measurement_count(n: int, sampling_ratio: float) -> int:
    """M = round(SR * N) rounded half away from zero, clamped to [1, N]."""
    if not 0 < sampling_ratio <= 1:
        raise ConfigurationError(f"Sampling ratio {sampling_ratio} outside (0, 1]")
    m = math.floor(sampling_ratio * n + 0.5)
    return min(max(m, 1), n)


def select_rows(ordering: RowOrdering, sampling_ratio: float) -> np.ndarray:
    """First M rows of the ordering, in acquisition order."""
    m = measurement_count(ordering.order, sampling_ratio)
    return ordering.permutation[:m].copy()


def sense(img, rows, H: HadamardMatrix) -> np.ndarray:
    """
    Project the vectorized scene onto the selected Walsh rows.

    y[m] = <H[rows[m]], flatten_image(img)>, evaluated for all rows at once
    with the fast transform.
    """
    x = flatten_image(np.asarray(img, dtype=np.float64))
    if x.size != H.order:
        raise ShapeError(f"Image has {x.size} pixels but H has order {H.order}")
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size and (rows.min() < 0 or rows.max() >= H.order):
        raise ShapeError("Row index outside the Hadamard matrix")
    return fwht(x)[rows]


def add_noise(y, c: float, rng_seed: int) -> np.ndarray:
    """
    Add proportional Gaussian noise.

    Normal variates come from numpy's PCG64 generator (ziggurat sampler), so
    the same seed always yields the same draws and the noise scales linearly
    in c.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ShapeError("Cannot add noise to an empty measurement vector")
    if c < 0:
        raise ConfigurationError(f"Noise constant must be non-negative, got {c}")
    if c == 0:
        return y.copy()
    sigma = np.random.default_rng(rng_seed).standard_normal(y.size)
    return y + c * np.mean(np.abs(y)) * sigma


def derive_seed(
    base_seed: int,
    image_id: str,
    strategy: str,
    sampling_ratio: float,
    noise_c: float,
    run: int,
) -> int:
    """Stable 64-bit seed for one experiment cell."""
    key = f"{base_seed}|{image_id}|{strategy}|{sampling_ratio!r}|{noise_c!r}|{run}"
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def acquire(
    img,
    ordering: RowOrdering,
    H: HadamardMatrix,
    sensing: SensingConfig,
) -> MeasurementSet:
    """Select, sense and corrupt: one simulated acquisition."""
    rows = select_rows(ordering, sensing.sampling_ratio)
    y = sense(img, rows, H)
    logger.debug("Acquired %d of %d projections (seed %d)", rows.size, H.order, sensing.seed)
    return MeasurementSet(y=y, y_noisy=add_noise(y, sensing.noise_c, sensing.seed), row_indices=rows)


def write_measurements(ms: MeasurementSet, path: Union[str, Path]) -> Path:
    """Tab-separated columns: rank, natural row index, y, y_noisy."""
    path = Path(path)
    frame = pd.DataFrame({
        "rank": np.arange(ms.count),
        "row_index": np.asarray(ms.row_indices, dtype=np.int64),
        "y": ms.y,
        "y_noisy": ms.y_noisy,
    })
    frame.to_csv(path, sep="\t", index=False)
    return path
