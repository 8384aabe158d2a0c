"""Figure pipeline for wehrlsim CSV/JSON outputs."""

__version__ = "0.1.0"

from .pipeline import (
    EmptySeriesError,
    FigureSpec,
    MissingColumnError,
    RenderResult,
    figure_specs,
    render,
    render_all,
)
