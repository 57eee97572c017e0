"""Factory functions for creating and configuring toolkit components with dependency injection."""

from pathlib import Path
from typing import TYPE_CHECKING, Optional

from pml_design.entities import ToolkitConfig

if TYPE_CHECKING:
    from pml_design.services.feasibility import IFeasibilitySolver
    from pml_design.services.optimizer import ITradeoffOptimizer
from pml_design.repositories import (
    BaseArtifactRepository,
    BaseScenarioRepository,
    LocalArtifactRepository,
    LocalScenarioRepository,
)
from pml_design.structured_logging import get_logger

logger = get_logger("BOOTSTRAP")

# Component type registries for better error messages
SUPPORTED_SOLVERS = {"simplex", "highs"}


def get_feasibility_solver(config: ToolkitConfig) -> "IFeasibilitySolver":
    """Create the feasibility solver named by the configuration."""
    # Import here to avoid circular dependencies
    from pml_design.services.feasibility import HighsFeasibilitySolver, SimplexFeasibilitySolver

    solver_type = config.solver_backend

    if solver_type not in SUPPORTED_SOLVERS:
        available = ", ".join(sorted(SUPPORTED_SOLVERS))
        raise ValueError(f"Unknown solver type '{solver_type}'. Available types: {available}")

    if solver_type == "simplex":
        logger.info("Creating dense simplex feasibility solver", max_pivots=config.max_pivots)
        return SimplexFeasibilitySolver(config)
    if solver_type == "highs":
        logger.info("Creating HiGHS feasibility solver")
        return HighsFeasibilitySolver(config)

    # This should not be reachable due to SUPPORTED_SOLVERS check above
    raise ValueError(f"Solver type '{solver_type}' is supported but not implemented")


def get_optimizer(
    config: ToolkitConfig,
    tol: Optional[float] = None,
    prune: bool = True,
    workers: Optional[int] = None,
) -> "ITradeoffOptimizer":
    """Create the trade-off optimizer; explicit arguments override the configuration."""
    from pml_design.services.optimizer import TradeoffOptimizer

    return TradeoffOptimizer(
        solver=get_feasibility_solver(config),
        tol=tol if tol is not None else config.bisection_tol,
        prune=prune,
        workers=workers if workers is not None else config.curve_workers,
    )


def get_scenario_repository() -> BaseScenarioRepository:
    return LocalScenarioRepository()


def get_artifact_repository(out_dir: Path) -> BaseArtifactRepository:
    logger.debug("Using local artifact repository", out_dir=str(out_dir))
    return LocalArtifactRepository(out_dir)
