"""Figure rendering for potlab experiment CSVs."""

__version__ = "0.1.0"

from .render import FigureSpec, render
from .schemas import FIGURE_IDS, HEADERS, SchemaError, load_rows

__all__ = ["FigureSpec", "render", "FIGURE_IDS", "HEADERS", "SchemaError", "load_rows"]
