from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Literal, Optional, Union
from pathlib import Path

from spi_bench.orderings import STRATEGIES

TvType = Literal["isotropic", "anisotropic"]

DEFAULT_SAMPLING_RATIOS = [round(0.01 * i, 2) for i in range(1, 11)] + [0.2, 0.3, 0.5]
DEFAULT_NOISE_LEVELS = [0.0, 0.1, 0.5]
DESK_SAMPLING_RATIOS = [0.05, 0.1, 0.2]
DESK_PRESET = {"side": 64, "sampling_ratios": DESK_SAMPLING_RATIOS, "runs": 3}


def _split_list(v: Union[str, List, tuple]) -> list:
    """Accept comma-separated strings from KEY=VALUE documents."""
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return list(v)


class SensingConfig(BaseModel):
    """Acquisition parameters of one simulated measurement."""
    sampling_ratio: float = Field(..., gt=0, le=1, description="SR = M/N")
    noise_c: float = Field(0.0, ge=0, description="Proportional noise constant c")
    seed: int = Field(0, description="Seed of the normal variate stream")
    runs: int = Field(5, ge=1, description="Independent noise realizations")


class SolverConfig(BaseModel):
    """Augmented-Lagrangian TV solver parameters."""
    model_config = ConfigDict(frozen=True)

    mu: float = Field(2.0 ** 8, gt=0, description="Fidelity penalty weight")
    beta: float = Field(2.0 ** 5, gt=0, description="Gradient-splitting penalty weight")
    tol: float = Field(1e-4, gt=0, description="Relative-change stopping threshold")
    max_outer: int = Field(300, ge=1)
    max_inner: int = Field(20, ge=1)
    nonneg: bool = True
    tv_type: TvType = "isotropic"


class ExperimentGrid(BaseModel):
    """Full strategy x SR x noise x runs experiment over an image corpus."""
    image_paths: List[Path] = Field(..., min_length=1)
    side: int = Field(128, ge=2)
    strategies: List[str] = Field(default_factory=lambda: list(STRATEGIES))
    sampling_ratios: List[float] = Field(default_factory=lambda: list(DEFAULT_SAMPLING_RATIOS), min_length=1)
    noise_levels: List[float] = Field(default_factory=lambda: list(DEFAULT_NOISE_LEVELS), min_length=1)
    runs: int = Field(5, ge=1)
    base_seed: int = 0
    output_dir: Path = Path("results")
    per_image: bool = Field(False, description="Also write aggregate_by_image.csv")
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @field_validator("image_paths", "strategies", "sampling_ratios", "noise_levels", mode="before")
    def split_lists(cls, v):
        return _split_list(v)

    @field_validator("side")
    def validate_side(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError(f"Side must be a power of two, got {v}")
        return v

    @field_validator("strategies")
    def validate_strategies(cls, v: List[str]) -> List[str]:
        normalized = [s.strip().upper() for s in v]
        unknown = [s for s in normalized if s not in STRATEGIES]
        if unknown:
            raise ValueError(f"Unknown strategies {unknown}; expected a subset of {list(STRATEGIES)}")
        if not normalized:
            raise ValueError("At least one strategy is required")
        return list(dict.fromkeys(normalized))

    @field_validator("sampling_ratios")
    def validate_sampling_ratios(cls, v: List[float]) -> List[float]:
        for sr in v:
            if not 0 < sr <= 1:
                raise ValueError(f"Sampling ratio {sr} outside (0, 1]")
        return sorted(set(v))

    @field_validator("noise_levels")
    def validate_noise_levels(cls, v: List[float]) -> List[float]:
        for c in v:
            if c < 0:
                raise ValueError(f"Noise level {c} must be non-negative")
        return sorted(set(v))

    @property
    def k(self) -> int:
        return 2 * (self.side.bit_length() - 1)

    def desk(self) -> "ExperimentGrid":
        """Shrunken preset for CI: side 64, three sampling ratios, three runs."""
        return self.model_copy(update={**DESK_PRESET, "sampling_ratios": list(DESK_SAMPLING_RATIOS)})


class GridDocument(BaseModel):
    """Raw KEY=VALUE grid document before path expansion."""
    model_config = ConfigDict(extra="forbid")

    IMAGES: Optional[str] = None
    BUNDLED: bool = False
    SIDE: Optional[int] = None
    STRATEGIES: Optional[str] = None
    SAMPLING_RATIOS: Optional[str] = None
    NOISE_LEVELS: Optional[str] = None
    RUNS: Optional[int] = None
    BASE_SEED: Optional[int] = None
    OUTPUT_DIR: Optional[str] = None
    PER_IMAGE: Optional[bool] = None
    SOLVER_MU: Optional[float] = None
    SOLVER_BETA: Optional[float] = None
    SOLVER_TOL: Optional[float] = None
    SOLVER_MAX_OUTER: Optional[int] = None
    SOLVER_MAX_INNER: Optional[int] = None
    SOLVER_NONNEG: Optional[bool] = None
    SOLVER_TV_TYPE: Optional[TvType] = None

    @model_validator(mode="after")
    def validate_sources(self) -> "GridDocument":
        if not self.IMAGES and not self.BUNDLED:
            raise ValueError("Either IMAGES or BUNDLED=true must be given")
        return self

    def solver_overrides(self) -> dict:
        prefix = "SOLVER_"
        return {
            name[len(prefix):].lower(): value
            for name, value in self.model_dump().items()
            if name.startswith(prefix) and value is not None
        }

    def grid_fields(self) -> dict:
        mapping = {
            "SIDE": "side",
            "STRATEGIES": "strategies",
            "SAMPLING_RATIOS": "sampling_ratios",
            "NOISE_LEVELS": "noise_levels",
            "RUNS": "runs",
            "BASE_SEED": "base_seed",
            "OUTPUT_DIR": "output_dir",
            "PER_IMAGE": "per_image",
        }
        dumped = self.model_dump()
        return {field: dumped[key] for key, field in mapping.items() if dumped[key] is not None}
