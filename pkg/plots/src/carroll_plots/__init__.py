"""carroll-plots: figure rendering for carroll-lab CSV outputs."""

from .csvio import SchemaError, Table, read_table
from .figures import FigureSpec, render

__all__ = ["SchemaError", "Table", "read_table", "FigureSpec", "render"]

__version__ = "0.1.0"
