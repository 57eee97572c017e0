"""Linear feasibility check for eps-PML mechanisms with a worst-case utility order of at least h.

The program fixes p_ij = 0 wherever u_ij < h, removes columns whose PML lower bound
already exceeds eps, and asks for a row-stochastic table satisfying

    p_ij - exp(eps) * sum_k P_X(x_k) p_kj <= 0

for every remaining cell. Feasibility is certified with a phase-one linear program
(minimize the total violation of the row-sum equalities).
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linprog

from ..entities.config import ToolkitConfig
from ..entities.model import Mechanism, Prior, UtilityOrder
from ..entities.results import FeasibilityProgram, FeasibilityResult
from ..errors import InvalidInputError, SolverNumericalError
from ..structured_logging import get_logger
from .leakage import column_lower_bound, worst_case_pml
from .structure import check_threshold, y_plus

logger = get_logger("FEASIBILITY")

PRUNE_TOL = 1e-12
PIVOT_TOL = 1e-9


def prune_columns(prior: Prior, order: UtilityOrder, h: int, eps: float) -> frozenset[int]:
    """Columns that must carry no mass: outside Y+(h), or with a lower bound above eps."""
    if eps < 0.0:
        raise InvalidInputError(f"PML budget must be nonnegative, got {eps}")
    m = order.shape[1]
    kept = y_plus(order, h)
    pruned = {j for j in range(m) if j not in kept}
    pruned.update(j for j in kept if column_lower_bound(prior, order, h, j) > eps + PRUNE_TOL)
    return frozenset(pruned)


def build_program(prior: Prior, order: UtilityOrder, h: int, eps: float, prune: bool = True) -> FeasibilityProgram:
    ranks = order.array
    n, m = ranks.shape
    check_threshold(h, m)
    if prior.size != n:
        raise InvalidInputError(f"prior has {prior.size} entries but the utility order has {n} rows")
    if eps < 0.0:
        raise InvalidInputError(f"PML budget must be nonnegative, got {eps}")

    pruned = prune_columns(prior, order, h, eps) if prune else frozenset()
    free = (ranks >= h) & ~np.isin(np.arange(m), sorted(pruned))[np.newaxis, :]

    free_cells = tuple((int(i), int(j)) for i, j in zip(*np.nonzero(free)))
    forced_zero_cells = tuple((int(i), int(j)) for i, j in zip(*np.nonzero(~free)))
    index = {cell: k for k, cell in enumerate(free_cells)}
    num_vars = len(free_cells)

    eq_matrix = np.zeros((n, num_vars))
    for (i, _), k in index.items():
        eq_matrix[i, k] = 1.0

    scale = math.exp(eps)
    p = prior.array
    rows: list[NDArray[np.float64]] = []
    labels: list[tuple[int, int]] = []
    for j in range(m):
        members = [i for i in range(n) if free[i, j]]
        for i in members:
            row = np.zeros(num_vars)
            for k in members:
                row[index[(k, j)]] -= scale * p[k]
            row[index[(i, j)]] += 1.0
            rows.append(row)
            labels.append((i, j))
    ineq_matrix = np.vstack(rows) if rows else np.zeros((0, num_vars))

    structurally_infeasible = bool((~free.any(axis=1)).any())
    program = FeasibilityProgram(
        shape=(n, m),
        prior_probs=prior.probs,
        h=h,
        eps=eps,
        free_cells=free_cells,
        forced_zero_cells=forced_zero_cells,
        pruned_columns=pruned,
        eq_matrix=eq_matrix,
        ineq_matrix=ineq_matrix,
        ineq_labels=tuple(labels),
        structurally_infeasible=structurally_infeasible,
    )
    logger.debug(
        "Feasibility program built",
        h=h,
        eps=eps,
        variables=program.num_variables,
        constraints=program.num_constraints,
        pruned_columns=sorted(pruned),
        structurally_infeasible=structurally_infeasible,
    )
    return program


def program_document(prog: FeasibilityProgram) -> dict[str, Any]:
    """Plain-data dump of a program for diffing against external solvers."""
    names = [f"p[{i},{j}]" for i, j in prog.free_cells]

    def _row(coefficients: NDArray[np.float64]) -> dict[str, float]:
        return {names[k]: float(c) for k, c in enumerate(coefficients) if c != 0.0}

    constraints: list[dict[str, Any]] = []
    for i, row in enumerate(prog.eq_matrix):
        constraints.append({"name": f"row_sum[{i}]", "coefficients": _row(row), "sense": "==", "rhs": 1.0})
    for (i, j), row in zip(prog.ineq_labels, prog.ineq_matrix):
        constraints.append({"name": f"pml[{i},{j}]", "coefficients": _row(row), "sense": "<=", "rhs": 0.0})
    return {
        "shape": list(prog.shape),
        "h": prog.h,
        "eps": prog.eps,
        "variables": names,
        "lower_bounds": [0.0] * len(names),
        "forced_zero_cells": [list(cell) for cell in prog.forced_zero_cells],
        "pruned_columns": sorted(prog.pruned_columns),
        "constraints": constraints,
        "structurally_infeasible": prog.structurally_infeasible,
    }


class IFeasibilitySolver(ABC):
    """Interface for feasibility certification of a FeasibilityProgram."""

    @abstractmethod
    def solve(self, prog: FeasibilityProgram) -> FeasibilityResult:
        pass


class PhaseOneSolver(IFeasibilitySolver):
    """Shared witness post-processing for phase-one backends."""

    def __init__(self, config: Optional[ToolkitConfig] = None):
        config = config or ToolkitConfig()
        self.feasibility_tol = config.feasibility_tol
        self.zero_snap_tol = config.zero_snap_tol
        self.witness_tol = config.witness_tol
        self.max_pivots = config.max_pivots

    @abstractmethod
    def _minimize_violation(self, prog: FeasibilityProgram) -> tuple[float, NDArray[np.float64]]:
        """Return the optimal total violation and the matching variable vector."""

    def solve(self, prog: FeasibilityProgram) -> FeasibilityResult:
        if prog.structurally_infeasible:
            empty_rows = int((prog.eq_matrix.sum(axis=1) == 0.0).sum())
            logger.debug("Program has a row without free cells", h=prog.h, eps=prog.eps, empty_rows=empty_rows)
            return FeasibilityResult(
                status="infeasible", pruned_columns=prog.pruned_columns, violation=float(empty_rows)
            )

        violation, x = self._minimize_violation(prog)
        if violation > self.feasibility_tol:
            logger.debug("Program infeasible", h=prog.h, eps=prog.eps, violation=violation)
            return FeasibilityResult(status="infeasible", pruned_columns=prog.pruned_columns, violation=violation)

        witness = self._witness(prog, x)
        logger.debug("Program feasible", h=prog.h, eps=prog.eps, violation=violation)
        return FeasibilityResult(
            status="feasible",
            witness=witness,
            pruned_columns=prog.pruned_columns,
            violation=max(violation, 0.0),
        )

    def _witness(self, prog: FeasibilityProgram, x: NDArray[np.float64]) -> Mechanism:
        n, m = prog.shape
        x = np.where(x < self.zero_snap_tol, 0.0, x)
        probs = np.zeros((n, m))
        for k, (i, j) in enumerate(prog.free_cells):
            probs[i, j] = x[k]
        sums = probs.sum(axis=1)
        if (sums <= 0.0).any():
            raise SolverNumericalError(f"witness has an all-zero row at h={prog.h}, eps={prog.eps:.9g}")
        probs = probs / sums[:, np.newaxis]

        snapped = np.array([probs[i, j] for i, j in prog.free_cells])
        worst = float((prog.ineq_matrix @ snapped).max()) if prog.ineq_matrix.shape[0] else 0.0
        if worst > self.witness_tol:
            raise SolverNumericalError(
                f"snapped witness violates a PML constraint by {worst:.3g} at h={prog.h}, eps={prog.eps:.9g}"
            )
        witness = Mechanism.from_array(probs, builder="feasibility_witness", h=prog.h, eps=prog.eps)
        leakage = worst_case_pml(Prior(probs=prog.prior_probs), witness)
        if leakage > prog.eps + self.witness_tol:
            raise SolverNumericalError(
                f"snapped witness leaks {leakage:.9g} nats, above eps={prog.eps:.9g} at h={prog.h}"
            )
        return witness


class SimplexFeasibilitySolver(PhaseOneSolver):
    """Dense tableau phase-one simplex with Bland's rule."""

    def _minimize_violation(self, prog: FeasibilityProgram) -> tuple[float, NDArray[np.float64]]:
        num_vars = prog.num_variables
        n_ineq = prog.ineq_matrix.shape[0]
        n_eq = prog.eq_matrix.shape[0]
        n_rows = n_ineq + n_eq
        n_cols = num_vars + n_ineq + n_eq

        # Rows: [A_ineq | I | 0 | 0] then [A_eq | 0 | I | 1]; last row holds reduced costs and -objective
        tableau = np.zeros((n_rows + 1, n_cols + 1))
        tableau[:n_ineq, :num_vars] = prog.ineq_matrix
        tableau[:n_ineq, num_vars : num_vars + n_ineq] = np.eye(n_ineq)
        tableau[n_ineq:n_rows, :num_vars] = prog.eq_matrix
        tableau[n_ineq:n_rows, num_vars + n_ineq : n_cols] = np.eye(n_eq)
        tableau[n_ineq:n_rows, -1] = 1.0
        tableau[-1, :] = -tableau[n_ineq:n_rows, :].sum(axis=0)
        tableau[-1, num_vars + n_ineq : n_cols] = 0.0

        basis = np.arange(num_vars, n_cols)
        enterable = num_vars + n_ineq

        for _ in range(self.max_pivots):
            costs = tableau[-1, :enterable]
            candidates = np.flatnonzero(costs < -PIVOT_TOL)
            if candidates.size == 0:
                break
            pivcol = int(candidates[0])

            column = tableau[:n_rows, pivcol]
            eligible = np.flatnonzero(column > PIVOT_TOL)
            if eligible.size == 0:
                raise SolverNumericalError("phase-one objective reported unbounded; the tableau is corrupted")
            ratios = np.maximum(tableau[eligible, -1], 0.0) / column[eligible]
            best = ratios.min()
            ties = eligible[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            pivrow = int(ties[np.argmin(basis[ties])])

            self._pivot(tableau, basis, pivrow, pivcol)
        else:
            raise SolverNumericalError(f"simplex exceeded {self.max_pivots} pivots at h={prog.h}, eps={prog.eps:.9g}")

        violation = float(-tableau[-1, -1])
        x = np.zeros(n_cols)
        x[basis] = tableau[:n_rows, -1]
        return violation, x[:num_vars]

    @staticmethod
    def _pivot(tableau: NDArray[np.float64], basis: NDArray[np.int64], pivrow: int, pivcol: int) -> None:
        pivval = tableau[pivrow, pivcol]
        if abs(pivval) <= PIVOT_TOL:
            raise SolverNumericalError(f"pivot value {pivval:.3g} is below the pivot tolerance")
        basis[pivrow] = pivcol
        tableau[pivrow] /= pivval
        factors = tableau[:, pivcol].copy()
        factors[pivrow] = 0.0
        tableau -= np.outer(factors, tableau[pivrow])


class HighsFeasibilitySolver(PhaseOneSolver):
    """Phase-one problem handed to scipy's HiGHS backend."""

    def _minimize_violation(self, prog: FeasibilityProgram) -> tuple[float, NDArray[np.float64]]:
        num_vars = prog.num_variables
        n_eq = prog.eq_matrix.shape[0]
        n_ineq = prog.ineq_matrix.shape[0]
        cost = np.concatenate([np.zeros(num_vars), np.ones(n_eq)])
        a_eq = np.hstack([prog.eq_matrix, np.eye(n_eq)])
        a_ub = np.hstack([prog.ineq_matrix, np.zeros((n_ineq, n_eq))]) if n_ineq else None
        result = linprog(
            cost,
            A_ub=a_ub,
            b_ub=np.zeros(n_ineq) if n_ineq else None,
            A_eq=a_eq,
            b_eq=np.ones(n_eq),
            bounds=(0.0, None),
            method="highs",
            options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        )
        if result.status != 0:
            raise SolverNumericalError(f"HiGHS returned status {result.status}: {result.message}")
        return float(result.fun), np.asarray(result.x[:num_vars], dtype=float)


def solve_feasibility(prog: FeasibilityProgram, solver: Optional[IFeasibilitySolver] = None) -> FeasibilityResult:
    return (solver or SimplexFeasibilitySolver()).solve(prog)
