"""
Sylvester (natural order) Hadamard matrices and the column-major conventions
that map Walsh rows to 2D patterns and images to measurement vectors.
"""
from dataclasses import dataclass
from functools import cached_property
from math import isqrt
import logging

import numpy as np
import numpy.typing as npt
from scipy.linalg import hadamard

from spi_bench.errors import CapacityError, ShapeError

logger = logging.getLogger(__name__)

Pattern2D = npt.NDArray[np.int8]
GrayImage = npt.NDArray[np.float64]

# Orders at or above 2**DENSE_LIMIT_K are never materialized; rows come from
# the bit-parity formula instead.
DENSE_LIMIT_K = 14
MAX_K = 30


def _parity(values: np.ndarray) -> np.ndarray:
    """Parity of the set bits of each non-negative integer (< 2**32)."""
    v = values.astype(np.uint64, copy=True)
    for shift in (16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.int8)


def walsh_row(k: int, index: int) -> np.ndarray:
    """
    Generate row `index` of H_{2^k} without building the matrix.

    H[i, j] = (-1) ** popcount(i & j) for the Sylvester recursion.
    """
    n = 1 << k
    if not 0 <= index < n:
        raise ShapeError(f"Row index {index} outside [0, {n})")
    columns = np.arange(n, dtype=np.uint64)
    return (1 - 2 * _parity(columns & np.uint64(index))).astype(np.int8)


@dataclass(frozen=True)
class HadamardMatrix:
    """Natural-order Sylvester Hadamard matrix of order N = 2**k."""
    k: int

    @property
    def order(self) -> int:
        return 1 << self.k

    @property
    def side(self) -> int:
        """Side r of the square patterns (requires an even k)."""
        if self.k % 2:
            raise ShapeError(
                f"Order {self.order} is not the square of a power of two"
            )
        return 1 << (self.k // 2)

    @property
    def is_dense(self) -> bool:
        return self.k < DENSE_LIMIT_K

    @cached_property
    def entries(self) -> np.ndarray:
        """Dense N x N int8 matrix (only for orders below 2**DENSE_LIMIT_K)."""
        if not self.is_dense:
            raise CapacityError(
                f"Refusing to materialize H of order {self.order}; use row()"
            )
        logger.debug("Materializing dense Hadamard matrix of order %d", self.order)
        return hadamard(self.order, dtype=np.int8)

    def row(self, index: int) -> np.ndarray:
        if self.is_dense:
            if not 0 <= index < self.order:
                raise ShapeError(f"Row index {index} outside [0, {self.order})")
            return self.entries[index]
        return walsh_row(self.k, index)

    def rows(self, indices) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.intp)
        if self.is_dense:
            if indices.size and (indices.min() < 0 or indices.max() >= self.order):
                raise ShapeError("Row index outside the matrix")
            return self.entries[indices]
        return np.stack([walsh_row(self.k, int(i)) for i in indices])


def build_hadamard(k: int) -> HadamardMatrix:
    """
    Build the natural-order Sylvester matrix H_{2^k}.

    Args:
        k: Exponent of the order, N = 2**k

    Returns:
        HadamardMatrix; rows are generated lazily

    Raises:
        CapacityError: If 2**k exceeds the supported order
    """
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
        raise CapacityError(f"Hadamard exponent must be a non-negative integer, got {k!r}")
    if k > MAX_K:
        raise CapacityError(f"Hadamard order 2**{k} exceeds the supported 2**{MAX_K}")
    return HadamardMatrix(int(k))


def pattern_side(n: int) -> int:
    """Side r of the pattern for a row of length n, or raise ShapeError."""
    r = isqrt(n)
    if n < 1 or r * r != n or r & (r - 1):
        raise ShapeError(
            f"Row length {n} is not the square of a power of two"
        )
    return r


def reshape_row(row) -> Pattern2D:
    """Reshape a Walsh row column by column: pattern[i, j] = row[j*r + i]."""
    row = np.asarray(row)
    if row.ndim != 1:
        raise ShapeError(f"Expected a 1D row, got shape {row.shape}")
    r = pattern_side(row.size)
    return row.reshape((r, r), order="F")


def flatten_image(img) -> np.ndarray:
    """Vectorize an image with the same column-major convention as reshape_row."""
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ShapeError(f"Expected a square image, got shape {img.shape}")
    return img.ravel(order="F")


def unflatten_vector(vec, side: int) -> np.ndarray:
    vec = np.asarray(vec)
    if vec.size != side * side:
        raise ShapeError(f"Vector of length {vec.size} does not fill a {side}x{side} image")
    return vec.reshape((side, side), order="F")


def fwht(x) -> np.ndarray:
    """
    Fast Walsh-Hadamard transform in natural order along the last axis.

    Computes H @ x for the Sylvester matrix H in O(N log N); H is symmetric,
    so the same call applies H^T. No normalization is applied.
    """
    out = np.array(x, dtype=np.float64)
    n = out.shape[-1]
    if n & (n - 1):
        raise ShapeError(f"Transform length {n} is not a power of two")
    lead = out.shape[:-1]
    h = 1
    while h < n:
        blocks = out.reshape(lead + (n // (2 * h), 2, h))
        top = blocks[..., 0, :]
        bottom = blocks[..., 1, :]
        out = np.stack((top + bottom, top - bottom), axis=-2).reshape(lead + (n,))
        h *= 2
    return out
