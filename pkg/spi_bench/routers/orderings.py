from fastapi import APIRouter, Depends, HTTPException, Query, status
import logging

from spi_bench.errors import CapacityError, ConfigurationError, ShapeError
from spi_bench.orderings import OrderingCache
from spi_bench.routers.dependencies import get_ordering_cache
from spi_bench.schemas.api import OrderingResponse

logger = logging.getLogger(__name__)

# Scoring every row is O(N) pattern analyses; keep requests interactive
MAX_API_K = 12

router = APIRouter(
    prefix="",
    tags=["orderings"],
    responses={
        422: {"description": "Unknown strategy or unsupported order"},
    }
)


@router.get(
    "/{strategy}",
    response_model=OrderingResponse,
    summary="Get a Hadamard row ordering",
    description="""
    Scores every row of the natural-order Hadamard matrix H of order 2**k
    with the given strategy and returns the ascending-score permutation.

    Strategies:
    - NATURAL: identity
    - CC: connected constant blocks
    - TG: total gradient
    - AS: spectral peak distance
    - AI: mean co-occurrence inertia
    """
)
async def get_ordering(
    strategy: str,
    k: int = Query(4, ge=0, le=MAX_API_K, description="Matrix order is 2**k; k must be even"),
    cache: OrderingCache = Depends(get_ordering_cache),
) -> OrderingResponse:
    """Compute (or fetch from cache) the ordering of H_{2^k}"""
    try:
        logger.info(f"Fetching {strategy.upper()} ordering for k={k}")
        ordering = cache.get(strategy, k)
        return OrderingResponse(
            strategy=ordering.strategy,
            k=k,
            permutation=ordering.permutation.tolist(),
            scores=ordering.scores.tolist(),
        )
    except (ConfigurationError, ShapeError, CapacityError) as e:
        logger.warning("Rejected ordering request: %s", e)
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=str(e)
        )
