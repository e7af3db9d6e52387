"""Communication-free Lloyd-based flocking with safety and proximity guarantees."""
from ._backend import BACKEND
from .agent import AgentConfig, Decision, KinematicState, Measurement, decide, track
from .cells import (CellParams, CollisionStateError, InfeasibleProximityError, SensedEntity,
                    build_cell_A, build_cell_F)
from .geometry import ConvexRegion, GeometryError, HalfPlane, disc_polygon
from .simulator import (AgentSpec, NoiseModel, Obstacle, Scenario, TraceReport, check_proximity,
                        check_safety, metrics, run)
from .weighting import AdaptationParams, AdaptiveState, beta_min, weighted_centroid

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AgentConfig", "Decision", "KinematicState", "Measurement", "decide", "track",
    "CellParams", "CollisionStateError", "InfeasibleProximityError", "SensedEntity",
    "build_cell_A", "build_cell_F", "ConvexRegion", "GeometryError", "HalfPlane", "disc_polygon",
    "AgentSpec", "NoiseModel", "Obstacle", "Scenario", "TraceReport", "check_proximity",
    "check_safety", "metrics", "run", "AdaptationParams", "AdaptiveState", "beta_min",
    "weighted_centroid",
]
