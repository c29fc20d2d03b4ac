"""Sparse NLP solving: reference interior-point solver and KKT rechecks."""

from .interior_point import IpOptions, solve
from .kkt import KktReport, check_kkt
from .problem import NlpProblem, NlpSolution, dense_jacobian

__all__ = [
    "IpOptions",
    "solve",
    "KktReport",
    "check_kkt",
    "NlpProblem",
    "NlpSolution",
    "dense_jacobian",
]
