"""Structural derivations on the data model: ranks, supports and worst-case utility."""

from typing import Optional

import numpy as np

from ..entities.model import Mechanism, Prior, UtilityOrder, UtilityValues
from ..errors import InvalidInputError, OutOfSupportError


def check_shapes(mech: Mechanism, shape: tuple[int, int], what: str) -> None:
    if mech.shape != shape:
        raise InvalidInputError(f"mechanism shape {mech.shape} does not match {what} shape {shape}")


def check_threshold(h: int, m: int) -> None:
    if not 1 <= h <= m:
        raise InvalidInputError(f"utility order threshold h={h} is outside [1, {m}]")


def order_from_values(values: UtilityValues) -> UtilityOrder:
    """Rank each row in ascending order of utility; equal values rank by column index."""
    arr = values.array
    ranks = np.empty(arr.shape, dtype=np.int64)
    positions = np.arange(1, arr.shape[1] + 1)
    for i, row in enumerate(arr):
        ranks[i, np.argsort(row, kind="stable")] = positions
    return UtilityOrder.from_array(ranks)


def output_support(mech: Mechanism, prior: Optional[Prior] = None) -> frozenset[int]:
    """Columns with P_Y(y_j) > 0."""
    probs = mech.array
    if prior is None:
        return frozenset(int(j) for j in np.flatnonzero((probs > 0.0).any(axis=0)))
    if prior.size != probs.shape[0]:
        raise InvalidInputError(f"prior has {prior.size} entries but the mechanism has {probs.shape[0]} rows")
    p_y = prior.array @ probs
    return frozenset(int(j) for j in np.flatnonzero(p_y > 0.0))


def induced_input_support(mech: Mechanism, j: int) -> frozenset[int]:
    """Rows i with p_ij > 0, i.e. the inputs consistent with observing y_j."""
    probs = mech.array
    if not 0 <= j < probs.shape[1]:
        raise InvalidInputError(f"column {j} is outside [0, {probs.shape[1]})")
    rows = np.flatnonzero(probs[:, j] > 0.0)
    if rows.size == 0:
        raise OutOfSupportError(j)
    return frozenset(int(i) for i in rows)


def y_plus(order: UtilityOrder, h: int) -> frozenset[int]:
    """Columns holding at least one rank >= h."""
    ranks = order.array
    check_threshold(h, ranks.shape[1])
    return frozenset(int(j) for j in np.flatnonzero((ranks >= h).any(axis=0)))


def worst_case_order(mech: Mechanism, order: UtilityOrder) -> int:
    """h(P) = min rank over the strictly positive mechanism cells."""
    check_shapes(mech, order.shape, "utility order")
    positive = mech.array > 0.0
    return int(order.array[positive].min())


def worst_case_value(mech: Mechanism, values: UtilityValues) -> float:
    check_shapes(mech, values.shape, "utility values")
    positive = mech.array > 0.0
    return float(values.array[positive].min())


def row_zero_counts(mech: Mechanism) -> tuple[int, ...]:
    return tuple(int(z) for z in (mech.array == 0.0).sum(axis=1))
