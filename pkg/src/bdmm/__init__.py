"""Batch-dynamic maximal matching on a simulated k-player clique."""

from .dynamic_mm import Simulation, UpdateConfig
from .model import Graph, Matching, Partition, UpdateBatch
from .net import Network, NetworkConfig, Tag, Token

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "Matching",
    "Partition",
    "UpdateBatch",
    "Network",
    "NetworkConfig",
    "Tag",
    "Token",
    "Simulation",
    "UpdateConfig",
]
