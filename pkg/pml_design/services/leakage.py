"""Pointwise maximal leakage of discrete mechanisms.

All quantities are in nats. The PML of output y_j is computed through Bayes as
``log(max_i p_ij / P_Y(y_j))``, which never divides by a prior entry.
"""

import math
from typing import Optional

import numpy as np

from ..entities.model import FloatArray, Mechanism, Prior, UtilityOrder, UtilityValues
from ..entities.reports import LeakageReport, OutputLeakage
from ..errors import InvalidInputError, OutOfSupportError
from ..structured_logging import get_logger
from .structure import (
    check_shapes,
    check_threshold,
    induced_input_support,
    output_support,
    worst_case_order,
    worst_case_value,
    y_plus,
)

logger = get_logger("LEAKAGE")


def _column(prior: Prior, mech: Mechanism, j: int) -> tuple[FloatArray, float]:
    probs = mech.array
    if prior.size != probs.shape[0]:
        raise InvalidInputError(f"prior has {prior.size} entries but the mechanism has {probs.shape[0]} rows")
    if not 0 <= j < probs.shape[1]:
        raise InvalidInputError(f"column {j} is outside [0, {probs.shape[1]})")
    column = probs[:, j]
    p_y = float(prior.array @ column)
    if p_y <= 0.0:
        raise OutOfSupportError(j)
    return column, p_y


def pml_of_output(prior: Prior, mech: Mechanism, j: int) -> float:
    column, p_y = _column(prior, mech, j)
    return max(0.0, math.log(float(column.max()) / p_y))


def worst_case_pml(prior: Prior, mech: Mechanism) -> float:
    """Max PML over S_Y; the mechanism is eps-PML iff this is <= eps."""
    support = output_support(mech, prior)
    if not support:
        raise InvalidInputError("mechanism has an empty output support")
    return max(pml_of_output(prior, mech, j) for j in sorted(support))


def satisfies_pml(prior: Prior, mech: Mechanism, eps: float, atol: float = 1e-9) -> bool:
    return worst_case_pml(prior, mech) <= eps + atol


def posterior(prior: Prior, mech: Mechanism, j: int) -> FloatArray:
    """P_{X|Y=y_j}."""
    column, p_y = _column(prior, mech, j)
    result: FloatArray = prior.array * column / p_y
    return result


def decompose(prior: Prior, mech: Mechanism, j: int) -> tuple[float, float]:
    """Split the PML of y_j into support leakage and residual leakage.

    The support term is ``-log`` of the prior mass of the inputs that can produce y_j;
    the residual term is the PML under the prior rescaled to those inputs.
    """
    column, _ = _column(prior, mech, j)
    rows = sorted(induced_input_support(mech, j))
    restricted = prior.array[rows]
    mass = float(restricted.sum())
    support_term = -math.log(mass) if mass < 1.0 else 0.0
    rescaled_p_y = float((restricted / mass) @ column[rows])
    residual_term = max(0.0, math.log(float(column.max()) / rescaled_p_y))
    return support_term, residual_term


def column_lower_bound(prior: Prior, order: UtilityOrder, h: int, j: int) -> float:
    """-log of the prior mass of the inputs ranking y_j at h or above.

    Any mechanism whose column j stays on those inputs leaks at least this much at y_j.
    """
    ranks = order.array
    check_threshold(h, ranks.shape[1])
    if prior.size != ranks.shape[0]:
        raise InvalidInputError(f"prior has {prior.size} entries but the utility order has {ranks.shape[0]} rows")
    rows = ranks[:, j] >= h
    if not rows.any():
        raise InvalidInputError(f"column {j} has no rank >= {h}; its lower bound is infinite")
    mass = math.fsum(prior.array[rows])
    return -math.log(mass) if mass < 1.0 else 0.0


def corollary_epsilon(prior: Prior, order: UtilityOrder, h: int) -> float:
    """Leakage of the utility-safe mechanism M*(h): the largest column lower bound over Y+(h)."""
    return max(column_lower_bound(prior, order, h, j) for j in sorted(y_plus(order, h)))


def ldp_epsilon(mech: Mechanism) -> float:
    """LDP level of a mechanism: max over columns of log(max_i p_ij / min_i p_ij).

    Infinite as soon as a supported column contains a zero.
    """
    probs = mech.array
    level = 0.0
    for j in range(probs.shape[1]):
        column = probs[:, j]
        if not (column > 0.0).any():
            continue
        low = float(column.min())
        if low == 0.0:
            return math.inf
        level = max(level, math.log(float(column.max()) / low))
    return level


def leakage_report(
    prior: Prior,
    mech: Mechanism,
    order: UtilityOrder,
    values: Optional[UtilityValues] = None,
) -> LeakageReport:
    check_shapes(mech, order.shape, "utility order")
    records = []
    for j in sorted(output_support(mech, prior)):
        support_term, residual_term = decompose(prior, mech, j)
        records.append(
            OutputLeakage(
                output=j,
                pml=pml_of_output(prior, mech, j),
                support_term=support_term,
                residual_term=residual_term,
                input_support=tuple(sorted(induced_input_support(mech, j))),
            )
        )
    pmls = np.array([record.pml for record in records])
    argmax = int(np.argmax(pmls))
    report = LeakageReport(
        per_output=tuple(records),
        worst_case=float(pmls[argmax]),
        argmax_output=records[argmax].output,
        worst_case_order=worst_case_order(mech, order),
        worst_case_value=worst_case_value(mech, values) if values is not None else None,
    )
    logger.debug(
        "Leakage report computed",
        worst_case=report.worst_case,
        argmax_output=report.argmax_output,
        outputs=len(records),
    )
    return report
