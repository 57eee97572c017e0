"""Privacy-utility trade-off: least PML for a utility threshold, best threshold for a PML budget."""

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from ..entities.model import Prior, UtilityOrder
from ..entities.results import Mode, TradeoffPoint
from ..errors import InvalidInputError, SolverNumericalError
from ..structured_logging import get_logger, submit_in_context
from .feasibility import IFeasibilitySolver, SimplexFeasibilitySolver, build_program
from .leakage import corollary_epsilon
from .mechanisms import BUDGET_TOL, utility_safe
from .structure import check_threshold

logger = get_logger("OPTIMIZER")

MODES = ("safe", "optimal")


class ITradeoffOptimizer(ABC):
    """Interface for trade-off computations."""

    @abstractmethod
    def min_epsilon(self, prior: Prior, order: UtilityOrder, h: int, mode: Mode) -> TradeoffPoint:
        pass

    @abstractmethod
    def max_h_for_budget(self, prior: Prior, order: UtilityOrder, eps: float, mode: Mode) -> TradeoffPoint:
        pass

    @abstractmethod
    def tradeoff_curve(self, prior: Prior, order: UtilityOrder, mode: Mode) -> list[TradeoffPoint]:
        pass


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise InvalidInputError(f"Unknown mode '{mode}'. Available modes: {', '.join(MODES)}")


def safe_envelope(prior: Prior, order: UtilityOrder, h: int) -> tuple[int, float]:
    """Cheapest utility-safe mechanism with threshold at least h: (threshold, its leakage).

    The closed-form leakage is not monotone in h for every order, so the smallest value over
    thresholds h' >= h is the tightest utility-safe bound for worst-case order h.
    """
    m = order.shape[1]
    check_threshold(h, m)
    best_h, best_eps = h, corollary_epsilon(prior, order, h)
    for candidate in range(h + 1, m + 1):
        eps = corollary_epsilon(prior, order, candidate)
        if eps < best_eps - BUDGET_TOL:
            best_h, best_eps = candidate, eps
    return best_h, best_eps


class TradeoffOptimizer(ITradeoffOptimizer):
    """Bisection on eps for a fixed h, binary search on h for a fixed eps."""

    def __init__(
        self,
        solver: Optional[IFeasibilitySolver] = None,
        tol: float = 1e-6,
        prune: bool = True,
        workers: int = 1,
    ):
        if tol <= 0.0:
            raise InvalidInputError(f"bisection tolerance must be positive, got {tol}")
        self.solver = solver or SimplexFeasibilitySolver()
        self.tol = tol
        self.prune = prune
        self.workers = max(1, workers)

    def min_epsilon(self, prior: Prior, order: UtilityOrder, h: int, mode: Mode) -> TradeoffPoint:
        _check_mode(mode)
        check_threshold(h, order.shape[1])
        if mode == "safe":
            return TradeoffPoint(
                h=h, min_eps=corollary_epsilon(prior, order, h), witness=utility_safe(order, h), mode="safe"
            )

        # Upper end of the bracket is always achievable by a utility-safe mechanism
        safe_h, hi = safe_envelope(prior, order, h)
        witness = utility_safe(order, safe_h)
        lo = 0.0
        if hi <= self.tol:
            return TradeoffPoint(h=h, min_eps=hi, witness=witness, mode="optimal")

        at_zero = self.solver.solve(build_program(prior, order, h, 0.0, prune=self.prune))
        if at_zero.feasible and at_zero.witness is not None:
            return TradeoffPoint(h=h, min_eps=0.0, witness=at_zero.witness, mode="optimal")

        steps = 0
        while hi - lo > self.tol:
            mid = 0.5 * (lo + hi)
            result = self.solver.solve(build_program(prior, order, h, mid, prune=self.prune))
            if result.feasible and result.witness is not None:
                hi, witness = mid, result.witness
            else:
                lo = mid
            steps += 1
        logger.debug("Bisection finished", h=h, min_eps=hi, lower=lo, steps=steps)
        return TradeoffPoint(h=h, min_eps=hi, witness=witness, mode="optimal")

    def _achievable(self, prior: Prior, order: UtilityOrder, h: int, eps: float, mode: Mode) -> bool:
        if mode == "safe":
            return safe_envelope(prior, order, h)[1] <= eps + BUDGET_TOL
        return self.solver.solve(build_program(prior, order, h, eps, prune=self.prune)).feasible

    def max_h_for_budget(self, prior: Prior, order: UtilityOrder, eps: float, mode: Mode) -> TradeoffPoint:
        """Largest achievable worst-case order under eps, with the least-leakage mechanism at that order."""
        _check_mode(mode)
        if eps < 0.0:
            raise InvalidInputError(f"PML budget must be nonnegative, got {eps}")
        lo, hi = 1, order.shape[1]
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._achievable(prior, order, mid, eps, mode):
                lo = mid
            else:
                hi = mid - 1
        # The largest achievable threshold is itself within budget in safe mode, so M*(h) is the witness
        point = self.min_epsilon(prior, order, lo, mode)
        logger.info("Budget resolved to utility threshold", eps=eps, mode=mode, h=lo, min_eps=point.min_eps)
        return point

    def _curve_point(self, prior: Prior, order: UtilityOrder, h: int, mode: Mode) -> TradeoffPoint:
        try:
            return self.min_epsilon(prior, order, h, mode)
        except SolverNumericalError as err:
            logger.error("Trade-off point failed", h=h, mode=mode, error_type=type(err).__name__, error=str(err))
            return TradeoffPoint(h=h, min_eps=math.nan, witness=None, mode=mode, error=str(err))

    def tradeoff_curve(self, prior: Prior, order: UtilityOrder, mode: Mode) -> list[TradeoffPoint]:
        _check_mode(mode)
        thresholds = range(1, order.shape[1] + 1)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                futures = [submit_in_context(pool, self._curve_point, prior, order, h, mode) for h in thresholds]
                points = [future.result() for future in futures]
        else:
            points = [self._curve_point(prior, order, h, mode) for h in thresholds]
        for point in points:
            logger.info("Trade-off point", h=point.h, mode=mode, min_eps=point.min_eps, failed=point.failed)
        return points


def min_epsilon(
    prior: Prior, order: UtilityOrder, h: int, mode: Mode = "optimal", tol: float = 1e-6, prune: bool = True
) -> TradeoffPoint:
    return TradeoffOptimizer(tol=tol, prune=prune).min_epsilon(prior, order, h, mode)


def max_h_for_budget(prior: Prior, order: UtilityOrder, eps: float, mode: Mode = "safe") -> TradeoffPoint:
    return TradeoffOptimizer().max_h_for_budget(prior, order, eps, mode)


def tradeoff_curve(prior: Prior, order: UtilityOrder, mode: Mode = "safe") -> list[TradeoffPoint]:
    return TradeoffOptimizer().tradeoff_curve(prior, order, mode)
