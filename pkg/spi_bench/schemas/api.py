from pydantic import BaseModel, Field, field_validator
from typing import List, Literal, Optional

from spi_bench.orderings import STRATEGIES
from spi_bench.schemas.experiment import SensingConfig, TvType


class OrderingResponse(BaseModel):
    """Row ordering of H_{2^k}"""
    strategy: str
    k: int
    permutation: List[int] = Field(..., description="0-based natural indices in acquisition order")
    scores: List[float] = Field(..., description="Score of each natural row")


class MetricsResponse(BaseModel):
    """Global SSIM factors and PSNR of a test image against a reference"""
    ssim: float
    luminance: float
    contrast: float
    structure: float
    psnr: Optional[float] = Field(None, description="dB; null when the images are identical")
    identical: bool = False
    side: int


class ReconstructionRequest(BaseModel):
    """Simulate one acquisition of a bundled scene and reconstruct it"""
    scene: Literal["cameraman", "coffee"] = "cameraman"
    side: int = Field(32, ge=8, le=128)
    strategy: str = "CC"
    sampling_ratio: float = Field(0.2, gt=0, le=1)
    noise_c: float = Field(0.0, ge=0)
    seed: int = 0
    mu: Optional[float] = Field(None, gt=0)
    beta: Optional[float] = Field(None, gt=0)
    tol: Optional[float] = Field(None, gt=0)
    max_outer: Optional[int] = Field(None, ge=1, le=1000)
    tv_type: Optional[TvType] = None

    @field_validator("strategy")
    def validate_strategy(cls, v: str) -> str:
        v = v.strip().upper()
        if v not in STRATEGIES:
            raise ValueError(f"Strategy must be one of {list(STRATEGIES)}")
        return v

    @field_validator("side")
    def validate_side(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError("Side must be a power of two")
        return v

    def sensing(self) -> SensingConfig:
        return SensingConfig(sampling_ratio=self.sampling_ratio, noise_c=self.noise_c, seed=self.seed, runs=1)

    def solver_overrides(self) -> dict:
        fields = ("mu", "beta", "tol", "max_outer", "tv_type")
        return {name: getattr(self, name) for name in fields if getattr(self, name) is not None}


class ReconstructionResponse(BaseModel):
    scene: str
    side: int
    strategy: str
    measurements: int
    ssim: float
    psnr: Optional[float] = None
    outer_iterations: int
    converged: bool
