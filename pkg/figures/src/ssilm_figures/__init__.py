"""Figure rendering for the iterated-learning contact simulator's CSV outputs."""

__version__ = "0.1.0"

from .plots import plot_compare, plot_trajectories, plot_transition

__all__ = ["plot_compare", "plot_trajectories", "plot_transition"]
