from fastapi import APIRouter, Depends, HTTPException, status
import logging
import math

from fastapi.concurrency import run_in_threadpool

from spi_bench.errors import ConfigurationError, ShapeError, SolverDivergenceError
from spi_bench.hadamard_core import build_hadamard
from spi_bench.metrics import score_pair
from spi_bench.orderings import OrderingCache
from spi_bench.routers.dependencies import get_ordering_cache
from spi_bench.sampling import acquire
from spi_bench.scenes import make_scene
from spi_bench.schemas.api import ReconstructionRequest, ReconstructionResponse
from spi_bench.schemas.experiment import SolverConfig
from spi_bench.tv_solver import reconstruct

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="",
    tags=["reconstructions"],
    responses={
        422: {"description": "Invalid acquisition or solver parameters"},
        500: {"description": "Solver diverged"},
    }
)


def _simulate(request: ReconstructionRequest, cache: OrderingCache) -> ReconstructionResponse:
    k = 2 * (request.side.bit_length() - 1)
    H = build_hadamard(k)
    truth = make_scene(request.scene, request.side)
    ordering = cache.get(request.strategy, k)
    ms = acquire(truth, ordering, H, request.sensing())
    result = reconstruct(ms, H, SolverConfig(**request.solver_overrides()))
    score = score_pair(truth, result.image)
    return ReconstructionResponse(
        scene=request.scene,
        side=request.side,
        strategy=request.strategy,
        measurements=ms.count,
        ssim=score.ssim,
        psnr=None if math.isinf(score.psnr) else score.psnr,
        outer_iterations=result.outer_iterations,
        converged=result.converged,
    )


@router.post(
    "",
    response_model=ReconstructionResponse,
    summary="Simulate and reconstruct one acquisition",
    description="""
    Renders a bundled scene, acquires the first SR*N patterns of the chosen
    ordering with proportional Gaussian noise, reconstructs by TV
    minimization and scores the result against the scene.
    """
)
async def create_reconstruction(
    request: ReconstructionRequest,
    cache: OrderingCache = Depends(get_ordering_cache),
) -> ReconstructionResponse:
    """Run one simulated acquisition and reconstruction"""
    try:
        logger.info(
            "Reconstructing %s at %d with %s, SR=%s, c=%s",
            request.scene, request.side, request.strategy, request.sampling_ratio, request.noise_c,
        )
        return await run_in_threadpool(_simulate, request, cache)
    except SolverDivergenceError as e:
        logger.error(f"Solver diverged: {e}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=str(e)
        )
    except (ConfigurationError, ShapeError) as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
