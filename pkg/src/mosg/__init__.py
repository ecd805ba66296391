"""Solver for multi-objective security games with heterogeneous attackers."""
from .game import GameInstance, InfeasibleCoverage, InstanceError, Relation, dominates, fitness
from .discretize import IdealProfile, ideal_profile, target_order
from .evaluate import EvaluationResult, evaluate_code

__all__ = [
    "GameInstance", "InfeasibleCoverage", "InstanceError", "Relation", "dominates", "fitness",
    "IdealProfile", "ideal_profile", "target_order", "EvaluationResult", "evaluate_code",
]
__version__ = "0.1.0"
