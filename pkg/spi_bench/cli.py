"""Command-line entry point: spi-bench run | order | metrics | scenes | serve."""
from functools import wraps
from pathlib import Path
import logging
import math
import sys

import click

from spi_bench.config import configure_logging, get_settings
from spi_bench.errors import ConfigurationError, ImageFormatError, ShapeError, SpiBenchError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_ALL_FAILED = 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigurationError, ShapeError)):
        return EXIT_CONFIG
    if isinstance(exc, (OSError, ImageFormatError)):
        return EXIT_IO
    return EXIT_CONFIG


def handle_errors(command):
    """Map library errors to the documented exit codes."""
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (SpiBenchError, OSError) as exc:
            logger.error("%s", exc)
            click.echo(f"Error: {exc}", err=True)
            sys.exit(exit_code_for(exc))
    return wrapper


@click.group()
@click.option("--log-level", default=None, help="Override LOG_LEVEL from the environment")
def cli(log_level):
    """Compressive single-pixel imaging benchmark."""
    settings = get_settings()
    configure_logging((log_level or settings.LOG_LEVEL).upper())


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path),
              help="KEY=VALUE grid document")
@click.option("--desk", is_flag=True, help="Side 64, SR 0.05/0.1/0.2, three runs")
@click.option("--output", "output_dir", type=click.Path(path_type=Path), default=None,
              help="Override OUTPUT_DIR of the grid document")
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Worker processes (default: WORKERS setting)")
@handle_errors
def run(config_path, desk, output_dir, workers):
    """Run the reconstruction grid described by a config document."""
    from spi_bench.harness import load_grid, run_grid

    grid = load_grid(config_path, desk=desk, output_dir=output_dir)
    results = run_grid(grid, workers=workers)
    failed = sum(r.failed for r in results)
    click.echo(f"{len(results) - failed}/{len(results)} cells succeeded; results in {grid.output_dir}")
    if results and failed == len(results):
        sys.exit(EXIT_ALL_FAILED)


@cli.command()
@click.option("--strategy", required=True, help="NATURAL, CC, TG, AS or AI")
@click.option("--k", "k", required=True, type=click.IntRange(min=0), help="Matrix order is 2**k")
@click.option("--out", "out", required=True, type=click.Path(path_type=Path))
@handle_errors
def order(strategy, k, out):
    """Export a row ordering, one natural index per line."""
    from spi_bench.harness import export_ordering

    path = export_ordering(strategy, k, out, workers=get_settings().ORDERING_WORKERS)
    click.echo(f"Wrote {strategy.upper()} ordering of H_{1 << k} to {path}")


@cli.command()
@click.option("--ref", "ref", required=True, type=click.Path(path_type=Path))
@click.option("--test", "test", required=True, type=click.Path(path_type=Path))
@click.option("--side", type=int, default=None, help="Resample both images to this side first")
@handle_errors
def metrics(ref, test, side):
    """Global SSIM (with its factors) and PSNR of TEST against REF."""
    from spi_bench.harness import load_and_normalize, native_side
    from spi_bench.metrics import psnr, ssim_global

    side = side or native_side(ref)
    reference = load_and_normalize(ref, side)
    candidate = load_and_normalize(test, side)
    components = ssim_global(reference, candidate)
    value = psnr(reference, candidate)
    click.echo(f"ssim={components.ssim:.6f}")
    click.echo(f"luminance={components.luminance:.6f}")
    click.echo(f"contrast={components.contrast:.6f}")
    click.echo(f"structure={components.structure:.6f}")
    click.echo("psnr=inf" if math.isinf(value) else f"psnr={value:.4f}")


@cli.command()
@click.option("--out", "out", type=click.Path(path_type=Path), default=Path("scenes"))
@click.option("--side", type=int, default=128)
@handle_errors
def scenes(out, side):
    """Render the bundled test scenes as PNG files."""
    from spi_bench.scenes import write_scenes

    for path in write_scenes(out, side):
        click.echo(str(path))


@cli.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8080, type=int)
def serve(host, port):
    """Serve the HTTP API with uvicorn."""
    import uvicorn

    uvicorn.run("spi_bench.main:app", host=host, port=port)


def main():
    cli(prog_name="spi-bench")


if __name__ == "__main__":
    main()
