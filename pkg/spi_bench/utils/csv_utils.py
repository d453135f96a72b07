"""Schema-versioned CSV tables for experiment results."""
from pathlib import Path
from typing import Union
import logging

import pandas as pd

from spi_bench.errors import ConfigurationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_PREFIX = "# schema_version="


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    Write a UTF-8 CSV whose first line records the schema version.

    Args:
        frame: Table to write; the index is not written
        path: Destination file

    Returns:
        Path: The written file
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"{SCHEMA_PREFIX}{SCHEMA_VERSION}\n")
        frame.to_csv(handle, index=False, lineterminator="\n")
    logger.debug("Wrote %d rows to %s", len(frame), path)
    return path


def append_rows(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    """Append rows without a header to a table created by write_table."""
    with Path(path).open("a", encoding="utf-8", newline="") as handle:
        frame.to_csv(handle, index=False, header=False, lineterminator="\n")


def read_schema_version(path: Union[str, Path]) -> int:
    with Path(path).open("r", encoding="utf-8") as handle:
        first = handle.readline().strip()
    if not first.startswith(SCHEMA_PREFIX):
        raise ConfigurationError(f"{path} has no schema version header")
    return int(first[len(SCHEMA_PREFIX):])


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """Read a table written by write_table, refusing unknown schema versions."""
    version = read_schema_version(path)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{path} uses schema version {version}, expected {SCHEMA_VERSION}"
        )
    return pd.read_csv(path, skiprows=1, encoding="utf-8")
