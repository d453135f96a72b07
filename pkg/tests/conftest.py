import pytest
from pathlib import Path
from typing import Callable, List
from fastapi.testclient import TestClient
import numpy as np

from spi_bench.config import Settings, get_settings
from spi_bench.hadamard_core import HadamardMatrix, build_hadamard
from spi_bench.main import app
from spi_bench.scenes import write_scenes
from spi_bench.schemas.experiment import ExperimentGrid, SolverConfig
from tests.utils import square_phantom


@pytest.fixture(scope="session")
def settings() -> Settings:
    """Return application settings"""
    return get_settings()


@pytest.fixture(scope="session")
def client(settings) -> TestClient:
    """Return a TestClient instance"""
    return TestClient(app)


@pytest.fixture(scope="session")
def h16() -> HadamardMatrix:
    """Natural-order H_16 (4x4 patterns)"""
    return build_hadamard(4)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def phantom() -> np.ndarray:
    return square_phantom()


@pytest.fixture
def scene_dir(tmp_path: Path) -> Path:
    """Bundled scenes written as 16x16 PNGs"""
    directory = tmp_path / "scenes"
    write_scenes(directory, 16)
    return directory


@pytest.fixture
def tight_solver() -> SolverConfig:
    """Solver settings for full-sampling recovery checks"""
    return SolverConfig(tol=1e-9, max_outer=3000)


@pytest.fixture
def make_grid(tmp_path: Path, scene_dir: Path) -> Callable[..., ExperimentGrid]:
    """Factory for small 16x16 grids over the bundled scenes."""
    def factory(output: str = "results", images: List[str] = None, **overrides) -> ExperimentGrid:
        names = images or ["coffee"]
        fields = dict(
            image_paths=[scene_dir / f"{name}.png" for name in names],
            side=16,
            strategies=["CC", "AS"],
            sampling_ratios=[0.25],
            noise_levels=[0.0],
            runs=1,
            base_seed=7,
            output_dir=tmp_path / output,
        )
        fields.update(overrides)
        return ExperimentGrid(**fields)
    return factory
