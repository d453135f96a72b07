from fastapi import APIRouter, File, Form, HTTPException, UploadFile, status
from pathlib import Path
import logging
import math
import tempfile

from spi_bench.errors import ConfigurationError, ImageFormatError, ImageIOError, ShapeError
from spi_bench.harness import load_and_normalize
from spi_bench.metrics import psnr, ssim_global
from spi_bench.schemas.api import MetricsResponse

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="",
    tags=["metrics"],
    responses={
        415: {"description": "Upload is not a PNG or PGM image"},
        422: {"description": "Invalid side or image dimensions"},
    }
)


async def _store(upload: UploadFile, directory: Path, name: str) -> Path:
    # keep the client's suffix; PGM input is recognised by it
    suffix = Path(upload.filename or "").suffix.lower()
    path = directory / f"{name}{suffix}"
    path.write_bytes(await upload.read())
    return path


@router.post(
    "",
    response_model=MetricsResponse,
    summary="Score a test image against a reference",
    description="""
    Both uploads are converted to grayscale and resampled to `side` x `side`
    before scoring. Returns the global SSIM with its luminance, contrast and
    structure factors, and the PSNR in dB (null for identical images).
    """
)
async def score_images(
    reference: UploadFile = File(..., description="Reference PNG/PGM"),
    test: UploadFile = File(..., description="Test PNG/PGM"),
    side: int = Form(128, ge=2, le=1024),
) -> MetricsResponse:
    """Compute SSIM components and PSNR for an uploaded pair"""
    try:
        with tempfile.TemporaryDirectory() as tmp:
            directory = Path(tmp)
            ref_path = await _store(reference, directory, "reference")
            test_path = await _store(test, directory, "test")
            ref_img = load_and_normalize(ref_path, side)
            test_img = load_and_normalize(test_path, side)

        components = ssim_global(ref_img, test_img)
        value = psnr(ref_img, test_img)
        logger.info("Scored uploaded pair at side %d: SSIM %.4f", side, components.ssim)
        return MetricsResponse(
            **components._asdict(),
            psnr=None if math.isinf(value) else value,
            identical=math.isinf(value),
            side=side,
        )
    except ImageFormatError as e:
        raise HTTPException(
            status_code=status.HTTP_415_UNSUPPORTED_MEDIA_TYPE,
            detail=f"Unsupported image format: {e.format}"
        )
    except ImageIOError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except (ConfigurationError, ShapeError) as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
