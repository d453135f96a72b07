"""Integration tests for the HTTP API."""
import io

import numpy as np
import pytest
from httpx import AsyncClient
from PIL import Image

from spi_bench import __version__
from spi_bench.scenes import make_scene

pytestmark = pytest.mark.asyncio


def png_bytes(pixels: np.ndarray, fmt: str = "PNG") -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(buffer, format=fmt)
    return buffer.getvalue()


async def test_health(test_client: AsyncClient):
    """Test the liveness check and security headers."""
    response = await test_client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "version": __version__}
    assert response.headers["X-Content-Type-Options"] == "nosniff"
    assert response.headers["X-Frame-Options"] == "DENY"


async def test_get_cake_cutting_ordering(test_client: AsyncClient):
    """Test fetching the cake-cutting ordering of H_16."""
    response = await test_client.get("/api/orderings/cc", params={"k": 4})
    assert response.status_code == 200
    data = response.json()
    assert data["strategy"] == "CC"
    assert data["k"] == 4
    assert sorted(data["permutation"]) == list(range(16))
    assert data["permutation"][0] == 0
    assert data["scores"][0] == 1.0
    scores = [data["scores"][i] for i in data["permutation"]]
    assert scores == sorted(scores)


async def test_get_natural_ordering(test_client: AsyncClient):
    """Test that the natural ordering is the identity."""
    response = await test_client.get("/api/orderings/NATURAL", params={"k": 2})
    assert response.status_code == 200
    assert response.json()["permutation"] == [0, 1, 2, 3]


@pytest.mark.parametrize("path, params", [
    ("/api/orderings/XX", {"k": 4}),
    ("/api/orderings/CC", {"k": 3}),
    ("/api/orderings/CC", {"k": 20}),
])
async def test_invalid_ordering_requests(test_client: AsyncClient, path, params):
    """Test that unknown strategies and unsupported orders are rejected."""
    response = await test_client.get(path, params=params)
    assert response.status_code == 422


async def test_score_identical_images(test_client: AsyncClient):
    """Test that identical uploads give SSIM 1 and a null PSNR."""
    image = png_bytes(make_scene("coffee", 16))
    response = await test_client.post(
        "/api/metrics",
        files={"reference": ("ref.png", image, "image/png"), "test": ("test.png", image, "image/png")},
        data={"side": "16"},
    )
    assert response.status_code == 200
    data = response.json()
    assert data["ssim"] == pytest.approx(1.0, abs=1e-12)
    assert data["psnr"] is None
    assert data["identical"] is True


async def test_score_different_images(test_client: AsyncClient):
    """Test scoring two different scenes."""
    response = await test_client.post(
        "/api/metrics",
        files={
            "reference": ("ref.png", png_bytes(make_scene("coffee", 16)), "image/png"),
            "test": ("test.png", png_bytes(make_scene("cameraman", 16)), "image/png"),
        },
        data={"side": "16"},
    )
    assert response.status_code == 200
    data = response.json()
    assert data["ssim"] < 1
    assert data["psnr"] > 0
    assert data["identical"] is False


async def test_score_rejects_unsupported_format(test_client: AsyncClient):
    """Test that a BMP upload is refused."""
    bmp = png_bytes(np.zeros((8, 8)), fmt="BMP")
    response = await test_client.post(
        "/api/metrics",
        files={"reference": ("ref.bmp", bmp, "image/bmp"), "test": ("test.bmp", bmp, "image/bmp")},
        data={"side": "8"},
    )
    assert response.status_code == 415


async def test_score_accepts_pgm_upload(test_client: AsyncClient):
    """Test that a grayscale PGM upload is scored."""
    pgm = png_bytes(make_scene("cameraman", 16), fmt="PPM")
    response = await test_client.post(
        "/api/metrics",
        files={
            "reference": ("ref.pgm", pgm, "image/x-portable-graymap"),
            "test": ("test.pgm", pgm, "image/x-portable-graymap"),
        },
        data={"side": "16"},
    )
    assert response.status_code == 200
    assert response.json()["identical"] is True


async def test_score_rejects_color_ppm_upload(test_client: AsyncClient):
    """Test that a colour PPM upload is refused."""
    ppm = png_bytes(np.zeros((8, 8, 3)), fmt="PPM")
    response = await test_client.post(
        "/api/metrics",
        files={
            "reference": ("ref.ppm", ppm, "image/x-portable-pixmap"),
            "test": ("test.ppm", ppm, "image/x-portable-pixmap"),
        },
        data={"side": "8"},
    )
    assert response.status_code == 415


async def test_reconstruction(test_client: AsyncClient):
    """Test one simulated acquisition and reconstruction."""
    payload = {
        "scene": "coffee",
        "side": 16,
        "strategy": "as",
        "sampling_ratio": 0.5,
        "noise_c": 0.0,
        "max_outer": 100,
    }
    response = await test_client.post("/api/reconstructions", json=payload)
    assert response.status_code == 200
    data = response.json()
    assert data["strategy"] == "AS"
    assert data["measurements"] == 128
    assert 0 < data["ssim"] <= 1
    assert 1 <= data["outer_iterations"] <= 100


@pytest.mark.parametrize("payload", [
    {"side": 24},
    {"strategy": "random"},
    {"sampling_ratio": 0},
    {"scene": "lena"},
])
async def test_invalid_reconstruction_requests(test_client: AsyncClient, payload):
    """Test validation of reconstruction requests."""
    response = await test_client.post("/api/reconstructions", json=payload)
    assert response.status_code == 422
    assert response.json()["detail"] == "Validation error"
