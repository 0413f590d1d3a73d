"""Deterministic potential-guided lattice-tree path planning in unknown
environments, with trap-escape strategies and a density-flow lattice solver
for bounding the search region."""

from .environment import GroundTruth, KnownEnvironment, distance_to_revealed, sense
from .errors import (CflViolationError, LatticeConsistencyError,
                     ModelViolationError, PlanningError, RegionError,
                     ResourceLimitError, ScenarioError)
from .geometry import ObstaclePrimitive, PotentialField, distance
from .graph import GenConfig, SearchGraph, generate_graph
from .pathfind import GraphPath, backtrace, bfs_path, dijkstra_path
from .planner import PlannerConfig, PlanResult, plan
from .trap_escape import TrapEscapePolicy

__version__ = "0.1.0"

__all__ = [
    "GroundTruth", "KnownEnvironment", "sense", "distance_to_revealed",
    "PlanningError", "ResourceLimitError", "LatticeConsistencyError",
    "ModelViolationError", "CflViolationError", "RegionError", "ScenarioError",
    "ObstaclePrimitive", "PotentialField", "distance",
    "GenConfig", "SearchGraph", "generate_graph",
    "GraphPath", "backtrace", "bfs_path", "dijkstra_path",
    "PlannerConfig", "PlanResult", "plan", "TrapEscapePolicy",
    "__version__",
]
