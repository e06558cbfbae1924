"""Figure rendering for omcontrol sweep CSVs."""

__version__ = "0.1.0"

from .plots import (
    FigplotsError,
    PLOTTERS,
    load_columns,
    plot_cool,
    plot_phase_diagram,
    plot_swap,
    plot_teleport,
    plot_trajectory,
)
