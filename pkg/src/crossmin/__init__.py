"""Graph embedding by stress majorization with edge-crossing penalties."""
from .crsm import PenaltyParams, PenaltyState, RunReport, crsm_run, penalized_objective
from .geometry import count_crossings, crossing_pairs, segments_intersect
from .mds import smacof_embed, stress
from .model import GraphError, GraphInstance, build_weights
from .separation import SeparationResult, solve_separation

__version__ = "0.1.0"

__all__ = [
    "GraphError", "GraphInstance", "PenaltyParams", "PenaltyState", "RunReport", "SeparationResult",
    "build_weights", "count_crossings", "crossing_pairs", "crsm_run", "penalized_objective",
    "segments_intersect", "smacof_embed", "solve_separation", "stress",
]
