from pydantic import BaseModel, Field
from typing import Optional

CELL_COLUMNS = [
    "image_id", "strategy", "sampling_ratio", "noise_c", "run", "seed",
    "measurements", "ssim", "psnr", "solver_iterations", "converged", "status", "error",
]
TIMING_COLUMNS = ["image_id", "strategy", "sampling_ratio", "noise_c", "run", "wall_time"]
AGGREGATE_COLUMNS = [
    "strategy", "sampling_ratio", "noise_c", "count",
    "ssim_mean", "ssim_std", "psnr_mean", "psnr_std",
]
IMAGE_AGGREGATE_COLUMNS = ["image_id", *AGGREGATE_COLUMNS]


class CellResult(BaseModel):
    """One (image, strategy, SR, c, run) reconstruction"""
    image_id: str
    strategy: str
    sampling_ratio: float
    noise_c: float
    run: int
    seed: int
    measurements: int
    ssim: Optional[float] = None
    psnr: Optional[float] = Field(None, description="inf when the reconstruction is exact")
    solver_iterations: int = 0
    converged: bool = False
    status: str = "ok"
    error: Optional[str] = None
    wall_time: float = Field(0.0, description="Seconds; written to timings.csv only")

    @property
    def failed(self) -> bool:
        return self.status != "ok"


class AggregateRow(BaseModel):
    """Mean and population standard deviation over the runs and images of one grid cell"""
    strategy: str
    sampling_ratio: float
    noise_c: float
    count: int
    ssim_mean: float
    ssim_std: float
    psnr_mean: float
    psnr_std: float

