"""
Result tables written by the command-line tools.

CSV files start with '#' comment lines recording the version, command and
full configuration; JSON files carry the same information as fields. Floats
are always written with 17 significant digits so identical runs produce
identical bytes.
"""

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from ramsey_echo.__about__ import __version__
from ramsey_echo.logger import logging_helper

logger = logging_helper.get_logger(__name__)

Cell = Union[float, int, str, bool]
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ResultTable:
    """
    Rows of one command's output.

    Attributes:
        command: Name of the producing command
        config: Configuration echo written to the header
        columns: Column names
        rows: One tuple per row, in output order
        metadata: Extra scalar results written to the header
    """

    command: str
    config: dict[str, Any]
    columns: tuple[str, ...]
    rows: list[tuple[Cell, ...]]
    metadata: dict[str, Cell] = field(default_factory=dict)

    def __post_init__(self):
        for index, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                msg = f"Row {index} has {len(row)} values, expected {len(self.columns)}"
                raise ValueError(msg)


def format_cell(value: Cell) -> str:
    """Render one value; floats use 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_cell(value: Cell) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_cell(value)
    return value


def render_csv(table: ResultTable) -> str:
    buffer = io.StringIO()
    buffer.write(f"# ramsey-echo {__version__}\n")
    buffer.write(f"# command: {table.command}\n")
    buffer.write(f"# config: {json.dumps(table.config, sort_keys=True)}\n")
    for key in sorted(table.metadata):
        buffer.write(f"# {key}: {format_cell(table.metadata[key])}\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def render_json(table: ResultTable) -> str:
    document = {
        "version": __version__,
        "command": table.command,
        "config": table.config,
        "metadata": {key: _json_cell(value) for key, value in table.metadata.items()},
        "columns": list(table.columns),
        "rows": [[_json_cell(value) for value in row] for row in table.rows],
    }
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def render(table: ResultTable, output_format: str) -> str:
    if output_format == "csv":
        return render_csv(table)
    if output_format == "json":
        return render_json(table)
    msg = f"Unknown output format: {output_format}; expected one of {FORMATS}"
    raise ValueError(msg)


def write_table(table: ResultTable, path: Optional[str], output_format: str = "csv") -> Optional[Path]:
    """
    Write a table to a file or to standard output.

    Args:
        table: The rows to write
        path: Destination file; None writes to standard output
        output_format: "csv" or "json"

    Returns:
        The written path, or None when printing

    Raises:
        OSError: If the destination cannot be written
    """
    text = render(table, output_format)
    if path is None:
        sys.stdout.write(text)
        return None

    target = Path(path)
    with open(target, "w", encoding="utf-8", newline="") as file:
        file.write(text)
    logger.info(f"Wrote {len(table.rows)} rows to {target}")
    return target


def batch_path(path: Optional[str], n_particles: int) -> Optional[str]:
    """Per-N file name for batch runs: out.csv -> out_N32.csv."""
    if path is None:
        return None
    target = Path(path)
    return str(target.with_name(f"{target.stem}_N{n_particles}{target.suffix}"))
