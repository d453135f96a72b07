from functools import lru_cache

from spi_bench.config import get_settings
from spi_bench.orderings import OrderingCache


@lru_cache()
def get_ordering_cache() -> OrderingCache:
    """Process-wide ordering cache shared by the API routes."""
    return OrderingCache(workers=get_settings().ORDERING_WORKERS)
