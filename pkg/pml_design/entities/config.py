"""Configuration models for the toolkit and its command-line front end."""

from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .results import Mode

Command = Literal["design", "analyze", "tradeoff", "reproduce", "scenario"]
Figure = Literal["fig1", "fig2", "fig3"]
BuiltinScenario = Literal["counting", "cyclic", "example1"]


class ToolkitConfig(BaseSettings):
    """Numerical settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
        populate_by_name=True,
    )

    solver_backend: Literal["simplex", "highs"] = Field(
        default="simplex",
        description="Feasibility solver backend",
        validation_alias="SOLVER_BACKEND",
    )
    feasibility_tol: float = Field(
        default=1e-8,
        description="Largest phase-one violation still certified as feasible",
        validation_alias="FEASIBILITY_TOL",
    )
    zero_snap_tol: float = Field(
        default=1e-9,
        description="Witness entries below this value are set to exactly zero",
        validation_alias="ZERO_SNAP_TOL",
    )
    witness_tol: float = Field(
        default=1e-6,
        description="Tolerance used when re-validating a snapped witness",
        validation_alias="WITNESS_TOL",
    )
    max_pivots: int = Field(
        default=5000,
        description="Pivot limit of the dense simplex before reporting a numerical failure",
        validation_alias="MAX_PIVOTS",
    )
    bisection_tol: float = Field(
        default=1e-6,
        description="Bracket width at which the epsilon bisection stops",
        validation_alias="BISECTION_TOL",
    )
    curve_workers: int = Field(
        default=1,
        description="Worker threads used for trade-off curve points and figure cells",
        validation_alias="CURVE_WORKERS",
    )
    artifact_version: str = Field(
        default="1",
        description="Version tag written into experiment metadata",
        validation_alias="ARTIFACT_VERSION",
    )


class CliConfig(BaseModel):
    """Validated command-line arguments for one invocation."""

    command: Command
    scenario_path: Optional[Path] = None
    mechanism_path: Optional[Path] = None
    eps: Optional[float] = Field(default=None, ge=0.0)
    h: Optional[int] = Field(default=None, ge=1)
    mode: Mode = "safe"
    tol: float = Field(default=1e-6, gt=0.0)
    seed: int = Field(default=0, ge=0)
    trials: int = Field(default=1000, ge=1)
    out: Path = Path(".")
    log_base: Literal["e", "2"] = "e"
    figure: Optional[Figure] = None
    builtin: Optional[BuiltinScenario] = None
    prune: bool = True
    dump_program: bool = False
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _required_arguments(self) -> "CliConfig":
        if self.command in ("design", "analyze", "tradeoff") and self.scenario_path is None:
            raise ValueError(f"'{self.command}' requires --scenario")
        if self.command == "design" and (self.eps is None) == (self.h is None):
            raise ValueError("'design' requires exactly one of --eps or --h")
        if self.command == "analyze" and self.mechanism_path is None:
            raise ValueError("'analyze' requires --mechanism")
        if self.command == "reproduce" and self.figure is None:
            raise ValueError("'reproduce' requires a figure (fig1, fig2 or fig3)")
        if self.command == "scenario" and self.builtin is None:
            raise ValueError("'scenario' requires a built-in scenario name")
        return self
