"""Figure generation from covswe CSV/VTK outputs.

This package never recomputes physics: it is a pure consumer of the solver's
delimited file formats.
"""

from .plots import plot_convergence, plot_profile_1d, plot_surface_2d

__all__ = ["plot_convergence", "plot_profile_1d", "plot_surface_2d"]
