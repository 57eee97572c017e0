"""Leakage report entities."""

from pydantic import BaseModel, ConfigDict, Field


class OutputLeakage(BaseModel):
    """PML of one supported output and its split into support and residual leakage."""

    model_config = ConfigDict(frozen=True)

    output: int = Field(description="0-based column index")
    pml: float = Field(description="PML of the output in nats")
    support_term: float = Field(description="-log of the prior mass of the induced input support")
    residual_term: float = Field(description="PML under the prior rescaled to the induced input support")
    input_support: tuple[int, ...]


class LeakageReport(BaseModel):
    """Per-output PML plus the worst case over S_Y, in nats."""

    model_config = ConfigDict(frozen=True)

    per_output: tuple[OutputLeakage, ...]
    worst_case: float
    argmax_output: int
    worst_case_order: int
    worst_case_value: float | None = None
