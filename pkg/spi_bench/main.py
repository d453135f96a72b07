from contextlib import asynccontextmanager
from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
import logging

from spi_bench import __version__
from spi_bench.config import configure_logging, get_settings
from spi_bench.routers import metrics, orderings, reconstructions

configure_logging(get_settings().LOG_LEVEL)
logging.getLogger("fastapi").setLevel(logging.INFO)

logger = logging.getLogger(__name__)

# Define API tags metadata
tags_metadata = [
    {
        "name": "orderings",
        "description": "Hadamard row orderings (natural, cake-cutting, total gradient, ascending scale, ascending inertia).",
    },
    {
        "name": "metrics",
        "description": "Global SSIM and PSNR of an uploaded image pair.",
    },
    {
        "name": "reconstructions",
        "description": "Simulated single-pixel acquisitions of the bundled scenes, reconstructed by TV minimization.",
    },
]


@asynccontextmanager
async def lifespan(app: FastAPI):
    settings = get_settings()
    logger.info(f"Starting {settings.PROJECT_NAME} ({settings.ENVIRONMENT})")
    yield
    logger.info("Shutting down")


app = FastAPI(
    title="Single-Pixel Imaging Benchmark API",
    version=__version__,
    description="""
    Simulation toolkit for compressive single-pixel imaging with Hadamard patterns.

    ## Key Features

    * **Orderings**: Rank Walsh patterns by block count, gradient, spectral scale or texture inertia
    * **Reconstruction**: Sub-sampled acquisition with proportional noise and TV recovery
    * **Metrics**: Global SSIM with its luminance, contrast and structure factors, and PSNR
    """,
    openapi_tags=tags_metadata,
    lifespan=lifespan
)


# Add security headers middleware
@app.middleware("http")
async def add_security_headers(request: Request, call_next):
    response = await call_next(request)
    response.headers["X-Content-Type-Options"] = "nosniff"
    response.headers["X-Frame-Options"] = "DENY"
    response.headers["Cache-Control"] = "no-store"
    return response


# Error handler for validation errors
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    error_details = []
    for error in exc.errors():
        location = " -> ".join(str(loc) for loc in error["loc"])
        error_details.append({
            "location": location,
            "message": error["msg"],
            "type": error["type"]
        })

    logger.warning(
        "Validation error on %s %s: %s",
        request.method, request.url.path, error_details
    )

    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={
            "detail": "Validation error",
            "errors": error_details
        }
    )


@app.get("/health", tags=["health"], summary="Liveness check")
async def health() -> dict:
    return {"status": "ok", "version": __version__}


# Include routers
app.include_router(orderings.router, prefix="/api/orderings", tags=["orderings"])
app.include_router(metrics.router, prefix="/api/metrics", tags=["metrics"])
app.include_router(reconstructions.router, prefix="/api/reconstructions", tags=["reconstructions"])
