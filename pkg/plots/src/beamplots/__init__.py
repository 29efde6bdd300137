"""Batch figure generation from beam-alignment experiment CSVs."""

from .errors import NoDataError, PlotsError, SchemaError
from .io import RecordsTable, read_comparison, read_records
from .render import (KINDS, PlotSpec, build_figure, cdf_at, margin_cdf_points,
                     render)

__all__ = [
    "KINDS", "NoDataError", "PlotsError", "PlotSpec", "RecordsTable",
    "SchemaError", "build_figure", "cdf_at", "margin_cdf_points",
    "read_comparison", "read_records", "render",
]
