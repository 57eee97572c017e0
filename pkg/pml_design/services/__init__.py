"""Computation services: structure, leakage, mechanism construction, feasibility, trade-off and experiments."""

from .feasibility import HighsFeasibilitySolver, IFeasibilitySolver, SimplexFeasibilitySolver, build_program
from .leakage import corollary_epsilon, decompose, leakage_report, pml_of_output, worst_case_pml
from .mechanisms import utility_safe
from .optimizer import ITradeoffOptimizer, TradeoffOptimizer

__all__ = [
    "HighsFeasibilitySolver",
    "IFeasibilitySolver",
    "SimplexFeasibilitySolver",
    "build_program",
    "corollary_epsilon",
    "decompose",
    "leakage_report",
    "pml_of_output",
    "worst_case_pml",
    "utility_safe",
    "ITradeoffOptimizer",
    "TradeoffOptimizer",
]
