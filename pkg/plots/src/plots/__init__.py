"""Deterministic SVG figures for projcurv experiment CSV outputs."""

from .figures import (
    KINDS,
    FigureResult,
    plot_cov_convergence,
    plot_decay,
    plot_density_hist,
    plot_tail,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "FigureResult",
    "plot_decay",
    "plot_tail",
    "plot_cov_convergence",
    "plot_density_hist",
    "render",
    "__version__",
]
