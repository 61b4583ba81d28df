"""Figure rendering for foraging-evolution experiment logs."""

from .bands import align_runs, median_curve, percentile_band
from .io import SchemaError, read_columns
from .plots import RENDERERS, FigureSpec, render

__all__ = [
    "FigureSpec",
    "RENDERERS",
    "SchemaError",
    "align_runs",
    "median_curve",
    "percentile_band",
    "read_columns",
    "render",
]
