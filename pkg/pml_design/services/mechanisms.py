"""Mechanism constructors: utility-safe, independent, the 3x3 fixture and LDP baselines."""

import math
from typing import Any

import numpy as np
from scipy.special import softmax

from ..entities.model import LdpBudget, Mechanism, Prior, UtilityOrder, UtilityValues
from ..errors import DegenerateBudgetError, InvalidInputError
from ..structured_logging import get_logger
from .leakage import corollary_epsilon
from .structure import check_threshold

logger = get_logger("MECHANISMS")

BUDGET_TOL = 1e-12


def utility_safe(order: UtilityOrder, h: int) -> Mechanism:
    """M*(h): zero on ranks below h, uniform over the M - h + 1 remaining outputs of each row."""
    ranks = order.array
    m = ranks.shape[1]
    check_threshold(h, m)
    probs = np.where(ranks >= h, 1.0 / (m - h + 1), 0.0)
    return Mechanism.from_array(probs, builder="utility_safe", h=h)


def independent(weights: Any, n_inputs: int) -> Mechanism:
    """Mechanism whose rows all equal ``weights``; it leaks nothing."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size < 1 or n_inputs < 1:
        raise InvalidInputError("independent mechanism needs at least one input and one output")
    if not np.all(np.isfinite(w)) or (w < 0.0).any() or abs(math.fsum(w) - 1.0) > 1e-9:
        raise InvalidInputError(f"weights {w.tolist()} are not a probability distribution")
    return Mechanism.from_array(np.tile(w, (n_inputs, 1)), builder="independent")


def example1_mechanism(prior: Prior) -> Mechanism:
    """Optimal 3x3 mechanism for the cyclic order [[3,2,1],[1,3,2],[2,1,3]] when P(x2) + P(x3) <= 1/2.

    Output y3 is dropped from the support, which beats M*(2) in that regime.
    """
    p = prior.array
    if p.size != 3:
        raise InvalidInputError(f"the 3x3 fixture needs a prior over 3 letters, got {p.size}")
    if p[0] < p.max():
        raise InvalidInputError("the 3x3 fixture requires x1 to be the most likely input")
    if p[1] + p[2] > 0.5 + BUDGET_TOL:
        raise InvalidInputError(f"the 3x3 fixture requires P(x2) + P(x3) <= 1/2, got {p[1] + p[2]:.6g}")
    probs = [
        [(1.0 - 2.0 * p[2]) / (2.0 * p[0]), (1.0 - 2.0 * p[1]) / (2.0 * p[0]), 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0],
    ]
    return Mechanism.from_array(probs, builder="example1")


def example1_min_epsilon(prior: Prior) -> float:
    """Smallest PML budget achieving worst-case order 2 on the 3x3 cyclic order.

    log 2 when P(x2) + P(x3) <= 1/2 (two outputs used), otherwise -log(P(x2) + P(x3)) (M*(2)).
    """
    p = prior.array
    if p.size != 3 or p[0] < p.max():
        raise InvalidInputError("the 3x3 fixture needs a 3-letter prior with x1 most likely")
    return min(math.log(2.0), -math.log(float(p[1] + p[2])))


def ldp_budget(eps: float, p_min: float) -> LdpBudget:
    """Largest LDP level whose mechanisms are guaranteed eps-PML under a prior with minimum p_min."""
    if not 0.0 < p_min < 1.0:
        raise InvalidInputError(f"p_min must lie in (0, 1), got {p_min}")
    if eps < 0.0:
        raise InvalidInputError(f"PML budget must be nonnegative, got {eps}")
    # log(k) and -log(1/k) can differ in the last bit
    slack = math.exp(-eps) - p_min
    if eps >= -math.log(p_min) - BUDGET_TOL or slack <= BUDGET_TOL * p_min:
        raise DegenerateBudgetError(eps, p_min)
    return LdpBudget(value=max(0.0, -math.log(slack / (1.0 - p_min))))


def exponential_mechanism(values: UtilityValues, ldp: LdpBudget) -> Mechanism:
    """Row i proportional to exp(u'_ij * ldp / (2 max|u'|))."""
    arr = values.array
    spread = 2.0 * float(np.abs(arr).max())
    if spread == 0.0:
        logits = np.zeros_like(arr)
    else:
        logits = arr * ldp.value / spread
    probs = softmax(logits, axis=1)
    return Mechanism.from_array(probs, builder="exponential", ldp=ldp.value, normalizer=spread)


def randomized_response(values: UtilityValues, ldp: LdpBudget) -> Mechanism:
    """N-ary randomized response on the input followed by the best-utility output for the reported input."""
    arr = values.array
    n, m = arr.shape
    # Written with exp(-ldp) so large budgets do not overflow
    decay = math.exp(-ldp.value)
    keep = 1.0 / (1.0 + (n - 1) * decay)
    flip = decay / (1.0 + (n - 1) * decay)
    channel = np.full((n, n), flip)
    np.fill_diagonal(channel, keep)

    remap = np.argmax(arr, axis=1)
    probs = np.zeros((n, m))
    for reported, column in enumerate(remap):
        probs[:, column] += channel[:, reported]
    return Mechanism.from_array(probs, builder="randomized_response", ldp=ldp.value)


def piecewise_safe_for_budget(prior: Prior, order: UtilityOrder, eps: float) -> tuple[int, Mechanism]:
    """Largest h whose utility-safe mechanism fits within eps, and that mechanism."""
    if eps < 0.0:
        raise InvalidInputError(f"PML budget must be nonnegative, got {eps}")
    m = order.shape[1]
    best = 1
    for h in range(1, m + 1):
        if corollary_epsilon(prior, order, h) <= eps + BUDGET_TOL:
            best = h
    logger.debug("Utility-safe threshold selected", eps=eps, h=best)
    return best, utility_safe(order, best)
