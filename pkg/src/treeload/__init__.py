"""Exact and simulated statistics of evolving random trees.

Closed-form distributions of cluster size, in-degree, and edge betweenness
in preferential-attachment trees with initial attractiveness (including the
uniform-attachment and star limits), a reproducible Monte Carlo grower with
linear-time edge measurement, and independent brute-force oracles that
cross-validate every formula.
"""

from .params import INFINITE, EdgeState, ModelParams
from .specialfn import PrecisionPolicy, SignedLogReal
from .growth import RngSpec, Tree, grow
from .measure import EdgeRecords, EnsembleStats, accumulate, edge_records

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "EdgeState",
    "ModelParams",
    "PrecisionPolicy",
    "SignedLogReal",
    "RngSpec",
    "Tree",
    "grow",
    "EdgeRecords",
    "EnsembleStats",
    "accumulate",
    "edge_records",
    "__version__",
]
