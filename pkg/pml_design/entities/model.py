"""Shared data model: priors, utility tables, mechanisms and scenarios.

All models are frozen pydantic models holding plain tuples so they hash, compare and
serialize cleanly; numerical code works on the ``.array`` views.
"""

import math
from typing import Any, Optional, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

PROB_TOL = 1e-9

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]
ParameterValue = Union[int, float, str]


def _check_rectangular(rows: tuple[tuple[Any, ...], ...], name: str) -> None:
    if len(rows) < 1:
        raise ValueError(f"{name} must have at least one row")
    width = len(rows[0])
    if width < 1:
        raise ValueError(f"{name} must have at least one column")
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{name} row {i} has {len(row)} entries, expected {width}")


class Prior(BaseModel):
    """Full-support distribution P_X over the input alphabet."""

    model_config = ConfigDict(frozen=True)

    probs: tuple[float, ...] = Field(description="P_X(x_i) for i = 1..N")

    @field_validator("probs")
    @classmethod
    def _validate_probs(cls, probs: tuple[float, ...]) -> tuple[float, ...]:
        if len(probs) < 1:
            raise ValueError("prior must have at least one entry")
        for i, p in enumerate(probs):
            if not math.isfinite(p) or p <= 0.0 or p > 1.0:
                raise ValueError(f"prior entry {i} = {p} is outside (0, 1]; full support is required")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"prior sums to {total!r}, expected 1")
        return probs

    @classmethod
    def uniform(cls, n: int) -> "Prior":
        return cls(probs=tuple([1.0 / n] * n))

    @classmethod
    def from_array(cls, probs: Any) -> "Prior":
        return cls(probs=tuple(float(p) for p in np.asarray(probs, dtype=float).ravel()))

    @property
    def array(self) -> FloatArray:
        return np.asarray(self.probs, dtype=float)

    @property
    def size(self) -> int:
        return len(self.probs)

    @property
    def p_min(self) -> float:
        return min(self.probs)


class UtilityValues(BaseModel):
    """Raw utility table U' (N x M, real valued)."""

    model_config = ConfigDict(frozen=True)

    values: tuple[tuple[float, ...], ...]

    @field_validator("values")
    @classmethod
    def _validate_values(cls, values: tuple[tuple[float, ...], ...]) -> tuple[tuple[float, ...], ...]:
        _check_rectangular(values, "utility_values")
        for i, row in enumerate(values):
            if not all(math.isfinite(v) for v in row):
                raise ValueError(f"utility_values row {i} has a non-finite entry")
        return values

    @classmethod
    def from_array(cls, values: Any) -> "UtilityValues":
        arr = np.asarray(values, dtype=float)
        return cls(values=tuple(tuple(float(v) for v in row) for row in arr))

    @property
    def array(self) -> FloatArray:
        return np.asarray(self.values, dtype=float)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.values), len(self.values[0])


class UtilityOrder(BaseModel):
    """Per-row utility ranks u_ij in [M]; 1 is the worst output for that input, M the best."""

    model_config = ConfigDict(frozen=True)

    orders: tuple[tuple[int, ...], ...]

    @field_validator("orders")
    @classmethod
    def _validate_orders(cls, orders: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
        _check_rectangular(orders, "utility_order")
        width = len(orders[0])
        expected = list(range(1, width + 1))
        for i, row in enumerate(orders):
            if sorted(row) != expected:
                raise ValueError(f"utility_order row {i} = {list(row)} is not a permutation of 1..{width}")
        return orders

    @classmethod
    def from_array(cls, orders: Any) -> "UtilityOrder":
        arr = np.asarray(orders, dtype=np.int64)
        return cls(orders=tuple(tuple(int(v) for v in row) for row in arr))

    @property
    def array(self) -> IntArray:
        return np.asarray(self.orders, dtype=np.int64)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.orders), len(self.orders[0])


class Mechanism(BaseModel):
    """Row-stochastic conditional distribution P_{Y|X} with provenance metadata."""

    model_config = ConfigDict(frozen=True)

    probs: tuple[tuple[float, ...], ...]
    builder: str = Field(default="explicit", description="Name of the constructor that produced the table")
    parameters: dict[str, ParameterValue] = Field(default_factory=dict)

    @field_validator("probs")
    @classmethod
    def _validate_probs(cls, probs: tuple[tuple[float, ...], ...]) -> tuple[tuple[float, ...], ...]:
        _check_rectangular(probs, "mechanism")
        for i, row in enumerate(probs):
            for j, p in enumerate(row):
                if not math.isfinite(p) or p < 0.0 or p > 1.0 + PROB_TOL:
                    raise ValueError(f"mechanism entry ({i}, {j}) = {p} is outside [0, 1]")
            total = math.fsum(row)
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(f"mechanism row {i} sums to {total!r}, expected 1")
        return probs

    @classmethod
    def from_array(cls, probs: Any, builder: str = "explicit", **parameters: ParameterValue) -> "Mechanism":
        arr = np.asarray(probs, dtype=float)
        return cls(
            probs=tuple(tuple(float(v) for v in row) for row in arr),
            builder=builder,
            parameters=dict(parameters),
        )

    @property
    def array(self) -> FloatArray:
        return np.asarray(self.probs, dtype=float)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.probs), len(self.probs[0])


class LdpBudget(BaseModel):
    """LDP level in nats obtained from a PML budget."""

    model_config = ConfigDict(frozen=True)

    value: float

    @field_validator("value")
    @classmethod
    def _validate_value(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0.0:
            raise ValueError(f"LDP budget must be finite and nonnegative, got {value}")
        return value


class ScenarioLabels(BaseModel):
    model_config = ConfigDict(frozen=True)

    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()


class Scenario(BaseModel):
    """Prior, utility order and optional raw utilities for one experiment."""

    model_config = ConfigDict(frozen=True)

    prior: Prior
    order: UtilityOrder
    values: Optional[UtilityValues] = None
    labels: Optional[ScenarioLabels] = None

    @model_validator(mode="before")
    @classmethod
    def _derive_order(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("order") is None and data.get("values") is not None:
            # Importing here to avoid circular import
            from pml_design.services.structure import order_from_values

            values = data["values"]
            if not isinstance(values, UtilityValues):
                values = UtilityValues.model_validate(values)
            data = {**data, "values": values, "order": order_from_values(values)}
        return data

    @model_validator(mode="after")
    def _check_consistency(self) -> "Scenario":
        n, m = self.order.shape
        if self.prior.size != n:
            raise ValueError(f"prior has {self.prior.size} entries but utility_order has {n} rows")
        if self.values is not None:
            if self.values.shape != (n, m):
                raise ValueError(f"utility_values shape {self.values.shape} does not match utility_order {(n, m)}")
            from pml_design.services.structure import order_from_values

            if order_from_values(self.values) != self.order:
                raise ValueError("utility_order is not the ascending rank order of utility_values")
        if self.labels is not None:
            if self.labels.inputs and len(self.labels.inputs) != n:
                raise ValueError(f"labels.inputs has {len(self.labels.inputs)} names, expected {n}")
            if self.labels.outputs and len(self.labels.outputs) != m:
                raise ValueError(f"labels.outputs has {len(self.labels.outputs)} names, expected {m}")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.order.shape
