"""Result entities produced by the feasibility, optimizer and experiment services."""

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .model import Mechanism

Mode = Literal["safe", "optimal"]
PatternKind = Literal["one-low-three-high", "three-low-one-high", "uniform", "explicit"]


@dataclass(frozen=True, eq=False)
class FeasibilityProgram:
    """Linear feasibility system for a (prior, order, h, eps) instance.

    Variables are the free cells in row-major order. ``eq_matrix @ x == 1`` holds the
    row sums; ``ineq_matrix @ x <= 0`` holds one PML inequality per (row, kept column)
    pair with a free cell.

    Attributes:
        shape: (N, M) of the mechanism.
        prior_probs: P_X, kept for witness re-validation.
        h: Utility order threshold.
        eps: PML budget in nats.
        free_cells: Variable positions.
        forced_zero_cells: Cells fixed at zero (low rank or pruned column).
        pruned_columns: Columns removed by the lower-bound rule.
        eq_matrix: One row per input letter.
        ineq_matrix: One row per PML inequality.
        ineq_labels: (row, column) of the cell each inequality bounds.
        structurally_infeasible: Some row has no free cell.
    """

    shape: tuple[int, int]
    prior_probs: tuple[float, ...]
    h: int
    eps: float
    free_cells: tuple[tuple[int, int], ...]
    forced_zero_cells: tuple[tuple[int, int], ...]
    pruned_columns: frozenset[int]
    eq_matrix: NDArray[np.float64]
    ineq_matrix: NDArray[np.float64]
    ineq_labels: tuple[tuple[int, int], ...] = field(default=())
    structurally_infeasible: bool = False

    @property
    def num_variables(self) -> int:
        return len(self.free_cells)

    @property
    def num_constraints(self) -> int:
        return int(self.eq_matrix.shape[0] + self.ineq_matrix.shape[0])


class FeasibilityResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: Literal["feasible", "infeasible"]
    witness: Optional[Mechanism] = None
    pruned_columns: frozenset[int] = frozenset()
    violation: float = Field(default=0.0, description="Optimal total violation of the phase-one problem")

    @model_validator(mode="after")
    def _witness_iff_feasible(self) -> "FeasibilityResult":
        if (self.status == "feasible") != (self.witness is not None):
            raise ValueError("a witness must be present exactly when the program is feasible")
        return self

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


class TradeoffPoint(BaseModel):
    """Minimal PML budget for worst-case utility order h."""

    model_config = ConfigDict(frozen=True)

    h: int
    min_eps: float
    witness: Optional[Mechanism] = None
    mode: Mode
    error: Optional[str] = Field(default=None, description="Set when the point could not be computed")

    @property
    def failed(self) -> bool:
        return self.error is not None


class PriorPattern(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PatternKind
    p_min: float = 0.25
    n: int = 4
    probs: Optional[tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_p_min(self) -> "PriorPattern":
        if self.kind in ("one-low-three-high", "three-low-one-high") and not 0.0 < self.p_min <= 1.0 / self.n:
            raise ValueError(f"p_min must lie in (0, 1/{self.n}] for the {self.kind} pattern, got {self.p_min}")
        if self.kind == "explicit" and self.probs is None:
            raise ValueError("explicit pattern requires probs")
        return self


class RunRecord(BaseModel):
    """One (eps, mechanism) row of the sampled worst-case utility experiment."""

    model_config = ConfigDict(frozen=True)

    eps: float
    mechanism_name: str
    sample_min_utility: float
    deterministic_min_utility: float
    trials: int
    seed: int
    clamped: bool = False
    h: Optional[int] = None

    @model_validator(mode="after")
    def _sample_not_below_support_minimum(self) -> "RunRecord":
        if self.sample_min_utility < self.deterministic_min_utility:
            raise ValueError("sampled minimum cannot fall below the minimum over the mechanism support")
        return self


class FigureCell(BaseModel):
    """One (p_min, h, mode) cell of the prior-sweep experiments."""

    model_config = ConfigDict(frozen=True)

    p_min: float
    h: int
    mode: Mode
    min_eps: float
    naive: bool = False
