"""
Experiment harness: image ingestion, the strategy x SR x noise x runs grid,
and the CSV/PNG/report artifacts it leaves behind.

Output layout under the grid's output directory:

    cells.csv               one row per cell, written as cells complete (in key order)
    aggregate.csv           mean / population std of SSIM and PSNR per (strategy, SR, c)
    aggregate_by_image.csv  the same per (image, strategy, SR, c); only with PER_IMAGE=true
    timings.csv             wall-clock seconds per cell
    summary.md              rendered run report
    reconstructions/        one PNG per successful cell
    traces/                 solver iteration traces when DEBUG_TRACE is set
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union
import logging
import time

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from PIL import Image, UnidentifiedImageError
from pydantic import ValidationError

from spi_bench.config import get_settings
from spi_bench.errors import (
    ArtifactWriteError,
    ConfigurationError,
    ImageFormatError,
    ImageIOError,
    ShapeError,
    SolverDivergenceError,
    SpiBenchError,
)
from spi_bench.hadamard_core import GrayImage, build_hadamard
from spi_bench.metrics import score_pair
from spi_bench.orderings import OrderingCache, RowOrdering, order_rows, write_ordering
from spi_bench.sampling import acquire, derive_seed, measurement_count
from spi_bench.scenes import write_scenes
from spi_bench.schemas.experiment import (
    DESK_PRESET,
    ExperimentGrid,
    GridDocument,
    SensingConfig,
    SolverConfig,
)
from spi_bench.schemas.results import (
    AGGREGATE_COLUMNS,
    CELL_COLUMNS,
    IMAGE_AGGREGATE_COLUMNS,
    TIMING_COLUMNS,
    AggregateRow,
    CellResult,
)
from spi_bench.tv_solver import reconstruct
from spi_bench.utils.csv_utils import append_rows, write_table
from spi_bench.utils.image_utils import pil_to_gray, resample_square
from spi_bench.utils.template_utils import render_template

logger = logging.getLogger(__name__)

SUPPORTED_FORMATS = {"PNG", "PPM"}  # Pillow reports PGM files as PPM
GRAY_PNM_MODES = {"L", "1", "I", "I;16", "I;16B", "I;16L"}
IMAGE_SUFFIXES = (".png", ".pgm")
GROUP_KEYS = ["strategy", "sampling_ratio", "noise_c"]
IMAGE_GROUP_KEYS = ["image_id", *GROUP_KEYS]


# ---------------------------------------------------------------------------
# Image I/O
# ---------------------------------------------------------------------------

def _check_format(path: Path, img: Image.Image) -> None:
    """Admit PNG, and PNM only as a grayscale .pgm file."""
    if img.format not in SUPPORTED_FORMATS:
        raise ImageFormatError(path, img.format)
    if img.format == "PPM" and (path.suffix.lower() != ".pgm" or img.mode not in GRAY_PNM_MODES):
        raise ImageFormatError(path, f"PPM ({img.mode})")


def load_and_normalize(path: Union[str, Path], side: int) -> GrayImage:
    """
    Load a raster as a side x side grayscale image on the 0..255 scale.

    Args:
        path: PNG or PGM file
        side: Output side in pixels

    Returns:
        float64 image; color is reduced with the 0.299/0.587/0.114 luma
        weights and other sizes are resampled bilinearly

    Raises:
        ImageIOError: The file cannot be opened
        ImageFormatError: The file is not a PNG or grayscale PGM raster
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            _check_format(path, img)
            img.load()
            gray = pil_to_gray(img)
    except UnidentifiedImageError:
        raise ImageFormatError(path, None)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        raise ImageIOError(path, exc.strerror)
    except SpiBenchError:
        raise
    except OSError as exc:
        raise ImageIOError(path, str(exc))

    if gray.shape != (side, side):
        logger.debug("Resizing %s from %s to %dx%d", path.name, gray.shape, side, side)
    return resample_square(gray, side)


def native_side(path: Union[str, Path]) -> int:
    """Side of a square PNG/PGM raster without decoding its pixels."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            _check_format(path, img)
            width, height = img.size
    except UnidentifiedImageError:
        raise ImageFormatError(path, None)
    except SpiBenchError:
        raise
    except OSError as exc:
        raise ImageIOError(path, exc.strerror or str(exc))
    if width != height:
        raise ShapeError(f"{path} is {width}x{height}; give an explicit side")
    return width


def save_image(img, path: Union[str, Path]) -> Path:
    """Write an image rounded and clamped to 8-bit grayscale PNG."""
    path = Path(path)
    pixels = np.clip(np.round(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(pixels).save(path, format="PNG")
    except OSError as exc:
        raise ArtifactWriteError(path, str(exc))
    return path


def discover_images(entries: Iterable[Union[str, Path]]) -> List[Path]:
    """Expand directories to their PNG/PGM files (sorted); files pass through."""
    paths: List[Path] = []
    for entry in entries:
        entry = Path(entry)
        if entry.is_dir():
            found = sorted(p for p in entry.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
            if not found:
                logger.warning("No PNG or PGM images in %s", entry)
            paths.extend(found)
        elif entry.exists():
            paths.append(entry)
        else:
            raise ImageIOError(entry, "no such file or directory")
    return paths


def image_ids(paths: Sequence[Path]) -> List[str]:
    """File stems, suffixed with their position when two files share a stem."""
    stems = [p.stem for p in paths]
    return [
        f"{stem}_{i}" if stems.count(stem) > 1 else stem
        for i, stem in enumerate(stems)
    ]


# ---------------------------------------------------------------------------
# Grid configuration
# ---------------------------------------------------------------------------

def load_grid(
    config_path: Union[str, Path],
    desk: bool = False,
    output_dir: Optional[Union[str, Path]] = None,
) -> ExperimentGrid:
    """
    Build an ExperimentGrid from a KEY=VALUE grid document.

    Relative IMAGES entries resolve against the document's directory. With
    BUNDLED=true the bundled scenes are rendered at the grid side into
    <output_dir>/scenes and added to the corpus.

    Raises:
        ConfigurationError: Missing document or invalid values
        ImageIOError: A listed image path does not exist
    """
    config_path = Path(config_path)
    if not config_path.is_file():
        raise ConfigurationError(f"Grid configuration {config_path} not found")
    raw = {key.upper(): value for key, value in dotenv_values(config_path).items() if value not in (None, "")}
    try:
        document = GridDocument(**raw)
        fields = document.grid_fields()
        if output_dir is not None:
            fields["output_dir"] = Path(output_dir)
        solver = SolverConfig(**document.solver_overrides())
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid grid configuration {config_path}: {exc}") from exc

    entries = []
    if document.IMAGES:
        for item in document.IMAGES.split(","):
            item = Path(item.strip())
            entries.append(item if item.is_absolute() else config_path.parent / item)
    paths = discover_images(entries)
    if document.BUNDLED:
        side = DESK_PRESET["side"] if desk else int(fields.get("side", ExperimentGrid.model_fields["side"].default))
        scene_dir = Path(fields.get("output_dir", ExperimentGrid.model_fields["output_dir"].default)) / "scenes"
        try:
            paths.extend(write_scenes(scene_dir, side))
        except OSError as exc:
            raise ArtifactWriteError(scene_dir, str(exc))

    try:
        grid = ExperimentGrid(image_paths=paths, solver=solver, **fields)
    except ValidationError as exc:
        raise ConfigurationError(f"Invalid grid configuration {config_path}: {exc}") from exc
    return grid.desk() if desk else grid


# ---------------------------------------------------------------------------
# Cell execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellTask:
    image_id: str
    strategy: str
    sampling_ratio: float
    noise_c: float
    run: int
    seed: int

    @property
    def stem(self) -> str:
        return f"{self.image_id}_{self.strategy}_sr{self.sampling_ratio:g}_c{self.noise_c:g}_run{self.run}"

    @property
    def sensing(self) -> SensingConfig:
        return SensingConfig(sampling_ratio=self.sampling_ratio, noise_c=self.noise_c, seed=self.seed, runs=1)


# Per-process state installed by _init_worker; read-only afterwards.
_worker_state: Dict[str, object] = {}


def _init_worker(
    k: int,
    images: Dict[str, GrayImage],
    permutations: Dict[str, np.ndarray],
    solver: SolverConfig,
    output_dir: str,
    trace: bool,
) -> None:
    _worker_state.clear()
    _worker_state.update(
        k=k,
        images=images,
        orderings={
            strategy: RowOrdering(strategy, permutation, np.zeros(permutation.size))
            for strategy, permutation in permutations.items()
        },
        solver=solver,
        output_dir=Path(output_dir),
        trace=trace,
    )


def _run_cell(task: CellTask) -> CellResult:
    """Acquire, reconstruct and score one cell; solver failures become failed rows."""
    state = _worker_state
    started = time.perf_counter()
    H = build_hadamard(state["k"])
    truth = state["images"][task.image_id]
    output_dir: Path = state["output_dir"]
    base = dict(
        image_id=task.image_id,
        strategy=task.strategy,
        sampling_ratio=task.sampling_ratio,
        noise_c=task.noise_c,
        run=task.run,
        seed=task.seed,
        measurements=measurement_count(H.order, task.sampling_ratio),
    )
    try:
        ms = acquire(truth, state["orderings"][task.strategy], H, task.sensing)
        trace_path = output_dir / "traces" / f"{task.stem}.csv" if state["trace"] else None
        result = reconstruct(ms, H, state["solver"], trace_path=trace_path)
        score = score_pair(truth, result.image)
        save_image(result.image, output_dir / "reconstructions" / f"{task.stem}.png")
    except SolverDivergenceError as exc:
        logger.warning("Cell %s diverged: %s", task.stem, exc)
        return CellResult(
            **base, status="diverged", error=str(exc),
            solver_iterations=exc.history_length,
            wall_time=time.perf_counter() - started,
        )
    except SpiBenchError as exc:
        logger.warning("Cell %s failed: %s", task.stem, exc)
        return CellResult(**base, status="failed", error=str(exc), wall_time=time.perf_counter() - started)

    logger.debug(
        "Cell %s: SSIM %.4f, PSNR %.2f dB, %d iterations",
        task.stem, score.ssim, score.psnr, result.outer_iterations,
    )
    return CellResult(
        **base,
        ssim=score.ssim,
        psnr=score.psnr,
        solver_iterations=result.outer_iterations,
        converged=result.converged,
        wall_time=time.perf_counter() - started,
    )


def grid_tasks(grid: ExperimentGrid, ids: Sequence[str]) -> List[CellTask]:
    """All cells of the grid in key order (image, strategy, SR, c, run)."""
    return [
        CellTask(
            image_id=image_id,
            strategy=strategy,
            sampling_ratio=sr,
            noise_c=c,
            run=run,
            seed=derive_seed(grid.base_seed, image_id, strategy, sr, c, run),
        )
        for image_id, strategy, sr, c, run in product(
            sorted(ids), grid.strategies, grid.sampling_ratios, grid.noise_levels, range(grid.runs)
        )
    ]


# ---------------------------------------------------------------------------
# Aggregation and reporting
# ---------------------------------------------------------------------------

def cells_frame(results: Sequence[CellResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [r.model_dump(include=set(CELL_COLUMNS)) for r in results],
        columns=CELL_COLUMNS,
    )


def aggregate(cells: pd.DataFrame, by_image: bool = False) -> pd.DataFrame:
    """
    Mean and population standard deviation of SSIM and PSNR per (strategy, SR, c).

    With by_image the runs of each image are summarized separately, keyed by
    (image_id, strategy, SR, c). Failed cells are excluded; groups keep their
    first-appearance order.
    """
    keys = IMAGE_GROUP_KEYS if by_image else GROUP_KEYS
    columns = IMAGE_AGGREGATE_COLUMNS if by_image else AGGREGATE_COLUMNS
    ok = cells[cells["status"] == "ok"]
    if ok.empty:
        return pd.DataFrame(columns=columns)
    grouped = ok.groupby(keys, sort=False)
    table = pd.DataFrame({
        "count": grouped["ssim"].size(),
        "ssim_mean": grouped["ssim"].mean(),
        "ssim_std": grouped["ssim"].std(ddof=0),
        "psnr_mean": grouped["psnr"].mean(),
        "psnr_std": grouped["psnr"].std(ddof=0),
    }).reset_index()
    return table[columns]


def best_strategies(table: pd.DataFrame) -> List[dict]:
    if table.empty:
        return []
    winners = table.loc[table.groupby(["sampling_ratio", "noise_c"], sort=True)["ssim_mean"].idxmax()]
    return winners[["sampling_ratio", "noise_c", "strategy"]].to_dict("records")


def write_summary(
    grid: ExperimentGrid,
    ids: Sequence[str],
    results: Sequence[CellResult],
    table: pd.DataFrame,
    path: Path,
) -> Path:
    rows = [AggregateRow(**record) for record in table.to_dict("records")]
    text = render_template("summary.md.j2", {
        "grid": grid,
        "images": list(ids),
        "total_cells": len(results),
        "failed_cells": sum(r.failed for r in results),
        "aggregates": rows,
        "best": best_strategies(table),
    })
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ArtifactWriteError(path, str(exc))
    return path


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _prepare_output(directory: Path, trace: bool) -> None:
    subdirs = ["reconstructions"] + (["traces"] if trace else [])
    try:
        for name in subdirs:
            (directory / name).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactWriteError(directory, str(exc))


def run_grid(
    grid: ExperimentGrid,
    workers: Optional[int] = None,
    cache: Optional[OrderingCache] = None,
    trace: Optional[bool] = None,
) -> List[CellResult]:
    """
    Run every cell of the grid and write the result artifacts.

    Args:
        grid: Validated experiment grid
        workers: Process count (defaults to Settings.WORKERS); 1 runs inline
        cache: Ordering cache shared across calls
        trace: Write solver traces (defaults to Settings.DEBUG_TRACE)

    Returns:
        CellResult per cell in key order; failed cells carry status != "ok"

    Raises:
        ImageIOError, ImageFormatError: An input image cannot be loaded
        ArtifactWriteError: The output directory is not writable
    """
    settings = get_settings()
    workers = workers or settings.WORKERS
    trace = settings.DEBUG_TRACE if trace is None else trace
    cache = cache or OrderingCache(workers=settings.ORDERING_WORKERS)
    output_dir = Path(grid.output_dir)
    _prepare_output(output_dir, trace)

    ids = image_ids(grid.image_paths)
    images = {
        image_id: load_and_normalize(path, grid.side)
        for image_id, path in zip(ids, grid.image_paths)
    }
    permutations = {
        strategy: cache.get(strategy, grid.k).permutation
        for strategy in grid.strategies
    }
    tasks = grid_tasks(grid, ids)
    logger.info(
        "Running %d cells (%d images, %d strategies, %d SRs, %d noise levels, %d runs) on %d worker(s)",
        len(tasks), len(ids), len(grid.strategies), len(grid.sampling_ratios),
        len(grid.noise_levels), grid.runs, workers,
    )

    cells_csv = output_dir / "cells.csv"
    try:
        write_table(pd.DataFrame(columns=CELL_COLUMNS), cells_csv)
    except OSError as exc:
        raise ArtifactWriteError(cells_csv, str(exc))

    init_args = (grid.k, images, permutations, grid.solver, str(output_dir), trace)
    results: List[CellResult] = []

    def collect(outcomes: Iterable[CellResult]) -> None:
        for result in outcomes:
            results.append(result)
            append_rows(cells_frame([result]), cells_csv)
            if len(results) % 50 == 0:
                logger.info("%d/%d cells done", len(results), len(tasks))

    if workers <= 1:
        _init_worker(*init_args)
        collect(map(_run_cell, tasks))
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=init_args
        ) as pool:
            collect(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (8 * workers))))

    frame = cells_frame(results)
    table = aggregate(frame)
    write_table(table, output_dir / "aggregate.csv")
    if grid.per_image:
        write_table(aggregate(frame, by_image=True), output_dir / "aggregate_by_image.csv")
    write_table(
        pd.DataFrame([r.model_dump(include=set(TIMING_COLUMNS)) for r in results], columns=TIMING_COLUMNS),
        output_dir / "timings.csv",
    )
    write_summary(grid, ids, results, table, output_dir / "summary.md")

    failed = sum(r.failed for r in results)
    if failed:
        logger.warning("%d of %d cells failed", failed, len(results))
    logger.info("Grid finished; results in %s", output_dir)
    return results


def export_ordering(
    strategy: str,
    k: int,
    path: Union[str, Path],
    workers: int = 1,
) -> Path:
    """
    Write the row ordering of H_{2^k} as one 0-based natural index per line.

    Raises:
        ConfigurationError: Unknown strategy
        ShapeError: k is odd, so rows do not reshape to square patterns
        ArtifactWriteError: The path is not writable
    """
    ordering = order_rows(build_hadamard(k), strategy, workers=workers)
    try:
        return write_ordering(ordering, path)
    except OSError as exc:
        raise ArtifactWriteError(path, str(exc))
