"""Figure pipeline for sweep CSVs (wire format schema=1)."""

from .csvdata import CsvFormatError, load_rows
from .figures import FIGURE_KINDS, FigureSpec, render, render_all

__all__ = ["CsvFormatError", "load_rows", "FIGURE_KINDS", "FigureSpec",
           "render", "render_all"]
