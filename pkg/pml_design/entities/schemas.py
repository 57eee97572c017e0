"""File document schemas for scenarios and mechanisms."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, model_validator

from .model import ParameterValue, ScenarioLabels


class ScenarioDocument(BaseModel):
    """On-disk scenario: a prior plus utility values, a utility order, or both."""

    model_config = ConfigDict(extra="forbid")

    prior: list[float]
    utility_values: Optional[list[list[float]]] = None
    utility_order: Optional[list[list[int]]] = None
    labels: Optional[ScenarioLabels] = None

    @model_validator(mode="after")
    def _needs_utilities(self) -> "ScenarioDocument":
        if self.utility_values is None and self.utility_order is None:
            raise ValueError("one of utility_values or utility_order is required")
        return self


class MechanismDocument(BaseModel):
    """On-disk mechanism table with provenance."""

    model_config = ConfigDict(extra="forbid")

    probs: list[list[float]]
    builder: str = "explicit"
    parameters: dict[str, ParameterValue] = {}
