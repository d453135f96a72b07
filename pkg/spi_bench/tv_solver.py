"""
Total-variation reconstruction from sub-sampled Walsh measurements.

Solves  min sum_i ||w_i||_2  subject to  Phi x = y,  D_i x = w_i
with an augmented Lagrangian and alternating directions: an exact shrinkage
step for w, a few Barzilai-Borwein gradient steps with backtracking for x,
then multiplier updates for both constraints.

Internally the sensing operator is normalized to A = Phi / sqrt(N) (orthonormal
rows) and intensities are divided by INTENSITY_SCALE, so the default penalty
weights behave the same at every resolution.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd

from spi_bench.errors import ConfigurationError, ShapeError, SolverDivergenceError
from spi_bench.hadamard_core import GrayImage, HadamardMatrix, fwht
from spi_bench.sampling import MeasurementSet
from spi_bench.schemas.experiment import SolverConfig

logger = logging.getLogger(__name__)

INTENSITY_SCALE = 255.0
ARMIJO_C = 1e-4
MAX_BACKTRACKS = 30
# inner steps stop once they move x by less than this fraction of the outer tolerance
INNER_TOL_FACTOR = 0.1


@dataclass
class ReconstructionResult:
    image: GrayImage
    outer_iterations: int
    final_objective: float
    converged: bool
    trace: List[Tuple[int, float, float]] = field(default_factory=list, repr=False)


def discrete_gradient(x) -> np.ndarray:
    """
    Forward differences with a zero difference at the far edge.

    Returns:
        Array of shape (r, r, 2): [..., 0] horizontal x[i, j+1] - x[i, j],
        [..., 1] vertical x[i+1, j] - x[i, j]
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"Expected a 2D image, got shape {x.shape}")
    w = np.zeros(x.shape + (2,))
    w[:, :-1, 0] = x[:, 1:] - x[:, :-1]
    w[:-1, :, 1] = x[1:, :] - x[:-1, :]
    return w


def discrete_gradient_adjoint(w) -> np.ndarray:
    """D^T w; exact adjoint of discrete_gradient for any w of shape (r, r, 2)."""
    w = np.asarray(w, dtype=np.float64)
    horizontal = w[..., 0].copy()
    vertical = w[..., 1].copy()
    # components D never produces
    horizontal[:, -1] = 0.0
    vertical[-1, :] = 0.0
    out = -horizontal - vertical
    out[:, 1:] += horizontal[:, :-1]
    out[1:, :] += vertical[:-1, :]
    return out


def total_variation(x, tv_type: str = "isotropic") -> float:
    g = discrete_gradient(x)
    if tv_type == "anisotropic":
        return float(np.abs(g).sum())
    return float(np.sqrt((g ** 2).sum(axis=-1)).sum())


def shrink_isotropic(z: np.ndarray, threshold: float) -> np.ndarray:
    """w_i = max(||z_i|| - threshold, 0) * z_i / ||z_i|| over the last axis."""
    norms = np.sqrt((z ** 2).sum(axis=-1, keepdims=True))
    scale = np.maximum(norms - threshold, 0.0) / np.where(norms > 0, norms, 1.0)
    return z * scale


def shrink_anisotropic(z: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(z) * np.maximum(np.abs(z) - threshold, 0.0)


class WalshOperator:
    """A = Phi / sqrt(N): selected natural-order Walsh rows acting on r x r images."""

    def __init__(self, side: int, rows):
        self.side = side
        self.n = side * side
        self.rows = np.asarray(rows, dtype=np.intp)
        if self.rows.ndim != 1 or self.rows.size == 0:
            raise ShapeError("At least one measurement row is required")
        if self.rows.min() < 0 or self.rows.max() >= self.n:
            raise ShapeError(f"Row indices must lie in [0, {self.n})")
        self._norm = math.sqrt(self.n)

    def forward(self, img: np.ndarray) -> np.ndarray:
        return fwht(img.ravel(order="F"))[self.rows] / self._norm

    def adjoint(self, z: np.ndarray) -> np.ndarray:
        full = np.zeros(self.n)
        np.add.at(full, self.rows, z)
        return (fwht(full) / self._norm).reshape((self.side, self.side), order="F")


class AugmentedLagrangian:
    """
    L(x, w, nu, lam) = sum ||w_i|| - nu.(Dx - w) + beta/2 ||Dx - w||^2
                       - lam.(Ax - b) + mu/2 ||Ax - b||^2
    """

    def __init__(self, op: WalshOperator, b: np.ndarray, config: SolverConfig):
        self.op = op
        self.b = b
        self.mu = config.mu
        self.beta = config.beta
        self.tv_type = config.tv_type

    def smooth_value(self, x, w, nu, lam) -> float:
        tv_residual = discrete_gradient(x) - w
        fidelity = self.op.forward(x) - self.b
        return float(
            -np.sum(nu * tv_residual)
            + 0.5 * self.beta * np.sum(tv_residual ** 2)
            - np.dot(lam, fidelity)
            + 0.5 * self.mu * np.dot(fidelity, fidelity)
        )

    def smooth_gradient(self, x, w, nu, lam) -> np.ndarray:
        tv_residual = discrete_gradient(x) - w
        fidelity = self.op.forward(x) - self.b
        return (
            discrete_gradient_adjoint(self.beta * tv_residual - nu)
            + self.op.adjoint(self.mu * fidelity - lam)
        )

    def value(self, x, w, nu, lam) -> float:
        if self.tv_type == "anisotropic":
            tv = np.abs(w).sum()
        else:
            tv = np.sqrt((w ** 2).sum(axis=-1)).sum()
        return float(tv) + self.smooth_value(x, w, nu, lam)

    def shrink(self, x, nu) -> np.ndarray:
        z = discrete_gradient(x) - nu / self.beta
        if self.tv_type == "anisotropic":
            return shrink_anisotropic(z, 1.0 / self.beta)
        return shrink_isotropic(z, 1.0 / self.beta)


def _minimize_x(
    lagrangian: AugmentedLagrangian,
    x: np.ndarray,
    w: np.ndarray,
    nu: np.ndarray,
    lam: np.ndarray,
    step: float,
    config: SolverConfig,
) -> Tuple[np.ndarray, float]:
    """Projected gradient descent with BB step lengths and Armijo backtracking."""
    value = lagrangian.smooth_value(x, w, nu, lam)
    grad = lagrangian.smooth_gradient(x, w, nu, lam)
    for _ in range(config.max_inner):
        trial_step = step
        for _ in range(MAX_BACKTRACKS):
            candidate = x - trial_step * grad
            if config.nonneg:
                np.maximum(candidate, 0.0, out=candidate)
            move = candidate - x
            decrease = np.sum(grad * move)
            if decrease >= 0:
                # no descent left along the projected direction
                return x, step
            candidate_value = lagrangian.smooth_value(candidate, w, nu, lam)
            if candidate_value <= value + ARMIJO_C * decrease:
                break
            trial_step *= 0.5
        else:
            return x, step

        candidate_grad = lagrangian.smooth_gradient(candidate, w, nu, lam)
        if np.linalg.norm(move) <= INNER_TOL_FACTOR * config.tol * max(np.linalg.norm(x), 1e-12):
            return candidate, step
        s = move.ravel()
        g = (candidate_grad - grad).ravel()
        curvature = np.dot(s, g)
        if curvature > 0:
            step = np.dot(s, s) / curvature
        else:
            step = trial_step
        x, value, grad = candidate, candidate_value, candidate_grad
    return x, step


def reconstruct(
    ms: MeasurementSet,
    H: HadamardMatrix,
    config: Optional[SolverConfig] = None,
    trace_path: Optional[Union[str, Path]] = None,
) -> ReconstructionResult:
    """
    Recover an image from (noisy) Walsh projections by TV minimization.

    Args:
        ms: Measurement set; y_noisy is what the detector recorded
        H: Natural-order Hadamard matrix whose rows were projected
        config: Solver parameters (defaults to SolverConfig())
        trace_path: Optional CSV path for the per-iteration trace

    Returns:
        ReconstructionResult with the image clamped to [0, 255]

    Raises:
        ShapeError: Dimension mismatch between measurements and H
        SolverDivergenceError: The objective became non-finite
    """
    config = config or SolverConfig()
    side = H.side
    op = WalshOperator(side, ms.row_indices)
    y = np.asarray(ms.y_noisy, dtype=np.float64)
    if y.shape != op.rows.shape:
        raise ShapeError(f"{y.size} measurements for {op.rows.size} rows")
    if not np.all(np.isfinite(y)):
        raise ConfigurationError("Measurement vector must be finite")

    b = y / (math.sqrt(op.n) * INTENSITY_SCALE)
    lagrangian = AugmentedLagrangian(op, b, config)

    # back-projection Phi^T y / N, in scaled units
    x = op.adjoint(b)
    if config.nonneg:
        np.maximum(x, 0.0, out=x)
    w = np.zeros((side, side, 2))
    nu = np.zeros_like(w)
    lam = np.zeros_like(b)
    step = 1.0 / (8.0 * config.beta + config.mu)

    trace: List[Tuple[int, float, float]] = []
    converged = False
    objective = float("nan")
    iteration = 0
    for iteration in range(1, config.max_outer + 1):
        w = lagrangian.shrink(x, nu)
        x_next, step = _minimize_x(lagrangian, x, w, nu, lam, step, config)

        tv_residual = discrete_gradient(x_next) - w
        fidelity = op.forward(x_next) - b
        objective = lagrangian.value(x_next, w, nu, lam)
        if not math.isfinite(objective):
            raise SolverDivergenceError("TV solver objective is not finite", history_length=len(trace))
        nu = nu - config.beta * tv_residual
        lam = lam - config.mu * fidelity

        change = np.linalg.norm(x_next - x)
        reference = np.linalg.norm(x)
        relative_change = change / reference if reference > 0 else (0.0 if change == 0 else math.inf)
        x = x_next

        residual = float(np.linalg.norm(fidelity)) * math.sqrt(op.n) * INTENSITY_SCALE
        trace.append((iteration, objective, residual))
        if iteration % 50 == 0:
            logger.debug("iteration %d: objective %.6g, residual %.6g", iteration, objective, residual)
        if relative_change < config.tol:
            converged = True
            break

    if trace_path is not None:
        pd.DataFrame(trace, columns=["iteration", "objective", "fidelity_residual"]).to_csv(
            trace_path, index=False
        )

    image = np.clip(x * INTENSITY_SCALE, 0.0, INTENSITY_SCALE)
    return ReconstructionResult(
        image=image,
        outer_iterations=iteration,
        final_objective=objective,
        converged=converged,
        trace=trace,
    )
