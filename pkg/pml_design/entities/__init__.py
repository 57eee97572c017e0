"""Data entities for the mechanism design toolkit."""

from .config import CliConfig, ToolkitConfig
from .model import LdpBudget, Mechanism, Prior, Scenario, ScenarioLabels, UtilityOrder, UtilityValues
from .reports import LeakageReport, OutputLeakage
from .results import (
    FeasibilityProgram,
    FeasibilityResult,
    FigureCell,
    Mode,
    PriorPattern,
    RunRecord,
    TradeoffPoint,
)
from .schemas import MechanismDocument, ScenarioDocument

__all__ = [
    "CliConfig",
    "ToolkitConfig",
    "LdpBudget",
    "Mechanism",
    "Prior",
    "Scenario",
    "ScenarioLabels",
    "UtilityOrder",
    "UtilityValues",
    "LeakageReport",
    "OutputLeakage",
    "FeasibilityProgram",
    "FeasibilityResult",
    "FigureCell",
    "Mode",
    "PriorPattern",
    "RunRecord",
    "TradeoffPoint",
    "MechanismDocument",
    "ScenarioDocument",
]
