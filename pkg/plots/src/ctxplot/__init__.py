"""Figure rendering for contextual-search benchmark CSVs."""

__version__ = "0.1.0"

from .reader import EXPECTED_HEADER, NoDataError, Row, SchemaError, load_rows
from .render import KINDS, FigureSpec, loglog_slope, render

__all__ = [
    "__version__",
    "EXPECTED_HEADER",
    "FigureSpec",
    "KINDS",
    "NoDataError",
    "Row",
    "SchemaError",
    "load_rows",
    "loglog_slope",
    "render",
]
