"""Fixtures for integration tests."""
import pytest
import pytest_asyncio
from pathlib import Path
from typing import AsyncGenerator, Callable
from click.testing import CliRunner
from httpx import ASGITransport, AsyncClient

from spi_bench.main import app
from tests.utils import write_grid_config


@pytest_asyncio.fixture
async def test_client() -> AsyncGenerator[AsyncClient, None]:
    """Fixture providing an async client bound to the ASGI app."""
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as client:
        yield client


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def small_config(tmp_path: Path, scene_dir: Path) -> Callable[..., Path]:
    """Factory for a 16x16 grid document over the bundled scenes."""
    def factory(name: str = "grid.env", **overrides) -> Path:
        entries = dict(
            images=str(scene_dir),
            side=16,
            strategies=["CC", "AS"],
            sampling_ratios=[0.25, 0.5],
            noise_levels=[0.0, 0.1],
            runs=2,
            base_seed=11,
            solver_max_outer=60,
            output_dir=str(tmp_path / "results"),
        )
        entries.update(overrides)
        return write_grid_config(tmp_path / name, **entries)
    return factory
