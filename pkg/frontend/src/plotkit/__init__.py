"""Offline rendering of hnls CSV outputs into figures.

This package consumes only the published CSV schemas (observable tables,
bilinear ratio tables); it never recomputes any physics.
"""

from plotkit.core import PlotSpec, RenderResult, SchemaError, read_csv, render

__all__ = ["PlotSpec", "RenderResult", "SchemaError", "read_csv", "render"]

__version__ = "0.1.0"
