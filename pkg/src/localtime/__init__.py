"""Local (occupation) time of discrete-time random walks on finite graphs.

Exact time-domain sums, z-domain resolvent formulas (numeric and as power
series in 1/z), large-time asymptotics, closed forms for the complete graph,
star graph and discrete line, and a seeded Monte Carlo cross-check.
"""

from .errors import *  # noqa: F401,F403
from .graph_model import (
    FREE,
    EnsembleSpec,
    Fixed,
    Free,
    Graph,
    TransitionMatrix,
    load_graph,
    n_step_probability,
    strongly_connected,
    transition_from_adjacency,
    validate_stochastic,
)
from .zseries import ZSeries

__version__ = "0.1.0"
