"""Figure rendering for pathvol CSV outputs."""

from .csvio import PathFile, read, staircase_points
from .render import render_composites, render_convergence_fan, render_diagnostics

__version__ = "0.1.0"

__all__ = ["PathFile", "read", "staircase_points", "render_composites",
           "render_convergence_fan", "render_diagnostics"]
