"""Reader for the carroll-lab CSV contract.

Files carry a 3-line header: a format tag line, the column names, the
units.  Values are plain floats.  Anything violating the contract raises
SchemaError naming the offending piece.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_TAG = "carroll-lab-csv v1"


class SchemaError(Exception):
    """CSV does not conform to the carroll-lab header/column contract."""


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[str, ...]
    units: tuple[str, ...]
    data: dict

    def column(self, name: str) -> np.ndarray:
        if name not in self.data:
            raise SchemaError(
                f"{self.name}: missing column {name!r} "
                f"(has {', '.join(self.columns)})")
        return self.data[name]


def read_table(path) -> Table:
    path = Path(path)
    lines = path.read_text().splitlines()
    if len(lines) < 3:
        raise SchemaError(f"{path.name}: truncated header")
    if not lines[0].startswith(f"# {FORMAT_TAG}"):
        raise SchemaError(f"{path.name}: missing format tag {FORMAT_TAG!r}")
    name = lines[0][len(FORMAT_TAG) + 3:].strip() or path.stem
    columns = tuple(c.strip() for c in lines[1][2:].split(","))
    units = tuple(u.strip() for u in lines[2][2:].split(","))
    body = [line for line in lines[3:] if line.strip()]
    if not body:
        raise SchemaError(f"{path.name}: no data rows")
    raw = []
    for i, line in enumerate(body):
        parts = line.split(",")
        if len(parts) != len(columns):
            raise SchemaError(
                f"{path.name}: row {i + 4} has {len(parts)} fields, "
                f"expected {len(columns)}")
        try:
            raw.append([float(v) for v in parts])
        except ValueError as exc:
            raise SchemaError(f"{path.name}: row {i + 4}: {exc}") from exc
    arr = np.asarray(raw)
    data = {col: arr[:, j] for j, col in enumerate(columns)}
    return Table(name, columns, units, data)


def pivot_heatmap(table: Table, row_col: str, col_col: str, value_col: str):
    """Long-format rows -> (row_values, col_values, 2-D matrix)."""
    r = table.column(row_col)
    c = table.column(col_col)
    v = table.column(value_col)
    rows = np.unique(r)
    cols = np.unique(c)
    grid = np.full((rows.size, cols.size), np.nan)
    ri = np.searchsorted(rows, r)
    ci = np.searchsorted(cols, c)
    grid[ri, ci] = v
    if np.any(np.isnan(grid)):
        raise SchemaError(
            f"{table.name}: ({row_col}, {col_col}) do not form a full grid")
    return rows, cols, grid
