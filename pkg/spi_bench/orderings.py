"""
Row orderings of the Hadamard matrix.

Every Walsh row is reshaped to its 2D pattern and scored; an ordering is the
stable ascending sort of those scores. Four scoring strategies are provided:

* CC  - cake-cutting: number of 4-connected constant-value blocks
* TG  - total gradient: sum of |Gx| + |Gy| with the border one-sided stencil
* AS  - ascending scale: distance of the dominant 2D spectral peak from DC
* AI  - ascending inertia: mean GLCM inertia over 0, 45, 90 and 135 degrees
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Literal, Optional, Tuple, Union, get_args
import logging
import threading

import numpy as np
from scipy import ndimage
from skimage.feature import graycomatrix

from spi_bench.errors import ConfigurationError, ShapeError
from spi_bench.hadamard_core import HadamardMatrix, Pattern2D, build_hadamard, reshape_row

logger = logging.getLogger(__name__)

Strategy = Literal["NATURAL", "CC", "TG", "AS", "AI"]
STRATEGIES: Tuple[str, ...] = get_args(Strategy)

GLCM_DIRECTIONS = (0, 45, 90, 135)
GLCM_OFFSET = 1
DEFAULT_PAD = 256
# Relative tolerance under which two spectral magnitudes count as a tie
PEAK_RTOL = 1e-9
SCORE_DECIMALS = 9


@dataclass(frozen=True)
class RowScore:
    natural_index: int
    score: float


@dataclass(frozen=True)
class RowOrdering:
    """Permutation of natural row indices with the scores that produced it."""
    strategy: str
    permutation: np.ndarray
    scores: np.ndarray

    @property
    def order(self) -> int:
        return int(self.permutation.size)

    def ranked(self) -> Iterator[RowScore]:
        for index in self.permutation:
            yield RowScore(int(index), float(self.scores[index]))


def _as_pattern(p) -> np.ndarray:
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ShapeError(f"Pattern must be square, got shape {p.shape}")
    return p


def score_cake_cutting(p: Pattern2D) -> float:
    """Number of maximal 4-connected regions of equal value."""
    p = _as_pattern(p)
    structure = ndimage.generate_binary_structure(2, 1)
    _, positive = ndimage.label(p > 0, structure=structure)
    _, negative = ndimage.label(p <= 0, structure=structure)
    return float(positive + negative)


def gradient_2d(p: Pattern2D) -> Tuple[np.ndarray, np.ndarray]:
    """
    Central differences inside, single-sided differences on the borders.

    Returns:
        (Gx, Gy): Gx differentiates along columns (j), Gy along rows (i)
    """
    p = _as_pattern(p)
    if p.shape[0] < 2:
        raise ShapeError("Gradient needs a pattern side of at least 2")
    gy, gx = np.gradient(p.astype(np.float64))
    return gx, gy


def score_total_gradient(p: Pattern2D) -> float:
    gx, gy = gradient_2d(p)
    return float(np.abs(gx).sum() + np.abs(gy).sum())


def default_pad(side: int) -> int:
    """Zero-padded transform size used for a pattern of the given side."""
    if side <= DEFAULT_PAD:
        return DEFAULT_PAD
    return 1 << (2 * side - 1).bit_length()


def first_quadrant_spectrum(p: Pattern2D, pad: int) -> np.ndarray:
    """
    Magnitude of the zero-padded 2D DFT restricted to bins 0..pad/2 on both axes.
    """
    p = _as_pattern(p)
    if pad < p.shape[0]:
        raise ConfigurationError(f"Padding {pad} is smaller than the pattern side {p.shape[0]}")
    # rfft2 already keeps columns 0..pad/2
    spectrum = np.fft.rfft2(p.astype(np.float64), s=(pad, pad))
    return np.abs(spectrum[: pad // 2 + 1, :])


def select_peak(magnitude: np.ndarray) -> Tuple[int, int]:
    """
    Bin (u, v) of the maximal magnitude.

    Ties (within PEAK_RTOL) go to the smallest distance from DC, then the
    smallest u, then the smallest v.
    """
    top = magnitude.max()
    candidates = np.argwhere(magnitude >= top * (1.0 - PEAK_RTOL))
    u, v = min(
        ((int(a), int(b)) for a, b in candidates),
        key=lambda uv: (uv[0] ** 2 + uv[1] ** 2, uv[0], uv[1]),
    )
    return u, v


def spectral_peak_distance(p: Pattern2D, pad: Optional[int] = None) -> float:
    """Euclidean distance (in padded frequency bins) of the spectral peak from DC."""
    p = _as_pattern(p)
    if pad is None:
        pad = default_pad(p.shape[0])
    u, v = select_peak(first_quadrant_spectrum(p, pad))
    return float(np.hypot(u, v))


def _check_glcm_args(direction: int, offset: int) -> None:
    if offset != GLCM_OFFSET:
        raise ConfigurationError(f"GLCM offset must be {GLCM_OFFSET}, got {offset}")
    if direction not in GLCM_DIRECTIONS:
        raise ConfigurationError(
            f"GLCM direction must be one of {GLCM_DIRECTIONS}, got {direction}"
        )


def _cooccurrence(p01: np.ndarray, directions) -> np.ndarray:
    """Symmetric 2-level co-occurrence counts, shape (2, 2, len(directions))."""
    counts = graycomatrix(
        p01.astype(np.uint8),
        distances=[GLCM_OFFSET],
        angles=[np.deg2rad(d) for d in directions],
        levels=2,
        symmetric=True,
        normed=False,
    )
    return counts[:, :, 0, :].astype(np.int64)


def glcm(p01, direction: int, offset: int = GLCM_OFFSET) -> np.ndarray:
    """
    Gray-level co-occurrence counts of a binary {0, 1} pattern.

    Pairs are counted symmetrically, so the returned 2x2 matrix is symmetric
    and its sum is N_theta.
    """
    _check_glcm_args(direction, offset)
    p01 = _as_pattern(p01)
    if not np.isin(p01, (0, 1)).all():
        raise ConfigurationError("GLCM input must contain only 0 and 1")
    return _cooccurrence(p01, [direction])[:, :, 0]


def glcm_inertia(counts, side: int) -> np.ndarray:
    """
    Inertia of each (2, 2, ...) co-occurrence count matrix along the last axis.

    The two binary levels occupy bins 1 and r of an r-level co-occurrence
    matrix, so every transition weighs (r - 1)**2. Counts are normalized by
    their own total, so any common scaling of a matrix leaves it unchanged.
    """
    counts = np.asarray(counts, dtype=np.float64)
    bins = np.array([1.0, float(side)])
    weights = (bins[:, None] - bins[None, :]) ** 2
    if counts.ndim == 2:
        counts = counts[:, :, None]
    totals = counts.sum(axis=(0, 1))
    return (weights[:, :, None] * counts).sum(axis=(0, 1)) / totals


def score_ascending_inertia(p: Pattern2D) -> float:
    """Mean inertia of the four GLCMs of the pattern."""
    p = _as_pattern(p)
    side = p.shape[0]
    if side < 2:
        raise ShapeError("Inertia needs a pattern side of at least 2")
    counts = _cooccurrence((p > 0).astype(np.uint8), GLCM_DIRECTIONS)
    return float(glcm_inertia(counts, side).mean())


SCORERS: Dict[str, Callable[[Pattern2D], float]] = {
    "CC": score_cake_cutting,
    "TG": score_total_gradient,
    "AS": spectral_peak_distance,
    "AI": score_ascending_inertia,
}


def score_rows(
    H: HadamardMatrix,
    scorer: Callable[[Pattern2D], float],
    workers: int = 1,
) -> np.ndarray:
    """Score every row's pattern; rows are independent so chunks may run in threads."""
    n = H.order

    def score_range(bounds: Tuple[int, int]) -> np.ndarray:
        start, stop = bounds
        return np.array(
            [scorer(reshape_row(H.row(i))) for i in range(start, stop)],
            dtype=np.float64,
        )

    if workers <= 1 or n < 2 * workers:
        return score_range((0, n))

    # dense rows are shared, so build them once before fanning out
    if H.is_dense:
        H.entries
    edges = np.linspace(0, n, workers + 1).astype(int)
    chunks = list(zip(edges[:-1], edges[1:]))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(score_range, chunks))
    return np.concatenate(parts)


def order_rows(
    H: HadamardMatrix,
    strategy: str,
    workers: int = 1,
) -> RowOrdering:
    """
    Ascending-score permutation of the rows of H.

    Args:
        H: Natural-order Hadamard matrix
        strategy: One of NATURAL, CC, TG, AS, AI
        workers: Threads used for row scoring

    Returns:
        RowOrdering whose ties keep natural-index order

    Raises:
        ConfigurationError: Unknown strategy
        ShapeError: Rows do not reshape to square patterns
    """
    strategy = strategy.upper()
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"Unknown ordering strategy {strategy!r}; expected one of {STRATEGIES}")
    n = H.order
    if strategy == "NATURAL":
        identity = np.arange(n, dtype=np.int64)
        return RowOrdering(strategy, identity, identity.astype(np.float64))

    H.side  # raises ShapeError for non-square orders
    logger.info("Scoring %d Hadamard rows for %s order", n, strategy)
    scores = np.round(score_rows(H, SCORERS[strategy], workers), SCORE_DECIMALS)
    permutation = np.argsort(scores, kind="stable").astype(np.int64)
    return RowOrdering(strategy, permutation, scores)


class OrderingCache:
    """In-memory cache of orderings keyed by (strategy, k)."""

    def __init__(self, workers: int = 1):
        self._workers = workers
        self._orderings: Dict[Tuple[str, int], RowOrdering] = {}
        self._lock = threading.Lock()

    def get(self, strategy: str, k: int) -> RowOrdering:
        key = (strategy.upper(), k)
        with self._lock:
            cached = self._orderings.get(key)
        if cached is not None:
            return cached
        ordering = order_rows(build_hadamard(k), key[0], workers=self._workers)
        with self._lock:
            self._orderings.setdefault(key, ordering)
            return self._orderings[key]

    def __len__(self) -> int:
        return len(self._orderings)


def write_ordering(ordering: RowOrdering, path: Union[str, Path]) -> Path:
    """One 0-based natural index per line, in rank order."""
    path = Path(path)
    path.write_text("".join(f"{int(i)}\n" for i in ordering.permutation), encoding="utf-8")
    return path


def read_ordering(path: Union[str, Path]) -> List[int]:
    lines = Path(path).read_text(encoding="utf-8").split()
    return [int(line) for line in lines]
