"""Reads snapshot files written by the radiation-diffusion solver and renders
the standard figure styles: field surfaces, mesh wireframes, and side-by-side
temperature contour comparisons.
"""

from .figures import DEFAULT_LEVELS, plot_contour_compare, plot_mesh, plot_surface
from .loader import Frame, SnapshotSet, read_snapshot_csv, read_vtk_structured

__version__ = "0.1.0"
