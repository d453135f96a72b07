"""Exception hierarchy shared by the library, the CLI and the HTTP surface."""
from pathlib import Path
from typing import Optional, Union


class SpiBenchError(Exception):
    """Base class for all spi-bench errors"""
    pass


class ConfigurationError(SpiBenchError, ValueError):
    """Invalid parameter or configuration value"""
    pass


class ShapeError(SpiBenchError, ValueError):
    """Array dimensions do not match what an operation requires"""
    pass


class CapacityError(SpiBenchError):
    """Requested Hadamard order cannot be represented on this platform"""
    pass


class SolverDivergenceError(SpiBenchError):
    """The TV solver produced a non-finite objective."""

    def __init__(self, message: str, history_length: int):
        super().__init__(f"{message} (after {history_length} outer iterations)")
        self.history_length = history_length


class ImageIOError(SpiBenchError, OSError):
    """An image file could not be read or written."""

    def __init__(self, path: Union[str, Path], reason: Optional[str] = None):
        self.path = Path(path)
        detail = f"Cannot access image {self.path}"
        if reason:
            detail += f": {reason}"
        super().__init__(detail)


class ImageFormatError(SpiBenchError):
    """An image decoded but is not a supported raster format."""

    def __init__(self, path: Union[str, Path], fmt: Optional[str]):
        self.path = Path(path)
        self.format = fmt
        super().__init__(f"Unsupported image format {fmt!r} for {self.path}")


class ArtifactWriteError(SpiBenchError, OSError):
    """An output artifact (CSV, ordering file, report) could not be written."""

    def __init__(self, path: Union[str, Path], reason: Optional[str] = None):
        self.path = Path(path)
        detail = f"Cannot write {self.path}"
        if reason:
            detail += f": {reason}"
        super().__init__(detail)
