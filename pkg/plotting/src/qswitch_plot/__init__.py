"""Publication figures for the resonator-switch simulator's CSV output."""

from .render import (
    PlotDataError,
    PlotSpec,
    build_figure,
    main,
    population_columns,
    read_series,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "PlotDataError",
    "PlotSpec",
    "build_figure",
    "main",
    "population_columns",
    "read_series",
    "render",
]
