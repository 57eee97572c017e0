"""Randomized checks of the leakage identities and the optimizer against brute force."""

import math

import numpy as np
import pytest

from pml_design.entities import Mechanism, Prior, UtilityOrder
from pml_design.services.feasibility import build_program, solve_feasibility
from pml_design.services.leakage import (
    column_lower_bound,
    corollary_epsilon,
    decompose,
    pml_of_output,
    posterior,
    worst_case_pml,
)
from pml_design.services.mechanisms import utility_safe
from pml_design.services.optimizer import TradeoffOptimizer, max_h_for_budget, min_epsilon
from pml_design.services.structure import output_support, worst_case_order


def _grid_min_pml(prior: Prior, order: UtilityOrder, h: int, steps: int) -> float:
    """Least worst-case PML over a grid of 2-row mechanisms with rank < h cells held at zero.

    Each row has exactly two nonzero cells, so one grid coordinate per row covers it.
    """
    ranks = order.array
    m = ranks.shape[1]
    grid = np.linspace(0.0, 1.0, steps + 1)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    probs = np.zeros(a.shape + (2, m))
    for row, t in ((0, a), (1, b)):
        free = np.flatnonzero(ranks[row] >= h)
        if free.size == 1:
            probs[..., row, free[0]] = 1.0
        else:
            probs[..., row, free[0]] = t
            probs[..., row, free[1]] = 1.0 - t
    p = prior.array
    p_y = p[0] * probs[..., 0, :] + p[1] * probs[..., 1, :]
    col_max = probs.max(axis=-2)
    ratio = np.divide(col_max, p_y, out=np.ones_like(p_y), where=p_y > 0.0)
    worst = np.log(ratio).max(axis=-1)
    return float(max(0.0, worst.min()))


@pytest.mark.unit
def test__decompose__terms_add_up_to_pml(rng: np.random.Generator, draw_prior, draw_mechanism) -> None:
    checked = 0
    while checked < 1000:
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        prior: Prior = draw_prior(rng, n)
        mech: Mechanism = draw_mechanism(rng, n, m)
        for j in sorted(output_support(mech, prior)):
            support_term, residual_term = decompose(prior, mech, j)
            assert support_term >= 0.0
            assert residual_term >= 0.0
            assert support_term + residual_term == pytest.approx(pml_of_output(prior, mech, j), abs=1e-9)
            checked += 1


@pytest.mark.unit
def test__pml_of_output__matches_posterior_ratio(rng: np.random.Generator, draw_prior, draw_mechanism) -> None:
    for _ in range(200):
        n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        prior: Prior = draw_prior(rng, n)
        mech: Mechanism = draw_mechanism(rng, n, m)
        for j in sorted(output_support(mech, prior)):
            ratio = float((posterior(prior, mech, j) / prior.array).max())
            assert pml_of_output(prior, mech, j) == pytest.approx(max(0.0, math.log(ratio)), abs=1e-9)


@pytest.mark.unit
def test__pml_of_output__at_least_column_lower_bound(
    rng: np.random.Generator, draw_prior, draw_order, draw_mechanism
) -> None:
    for _ in range(200):
        n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        mech: Mechanism = draw_mechanism(rng, n, m)
        h = worst_case_order(mech, order)
        for j in sorted(output_support(mech, prior)):
            assert pml_of_output(prior, mech, j) >= column_lower_bound(prior, order, h, j) - 1e-12


@pytest.mark.unit
def test__utility_safe__leakage_equals_corollary(rng: np.random.Generator, draw_prior, draw_order) -> None:
    for _ in range(200):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        h = int(rng.integers(1, m + 1))
        mech = utility_safe(order, h)
        assert worst_case_order(mech, order) == h
        assert worst_case_pml(prior, mech) == pytest.approx(corollary_epsilon(prior, order, h), abs=1e-9)
        for j in sorted(output_support(mech, prior)):
            ratio = float((posterior(prior, mech, j) / prior.array).max())
            assert math.log(ratio) == pytest.approx(column_lower_bound(prior, order, h, j), abs=1e-9)


@pytest.mark.functional
def test__min_epsilon__optimal_is_monotone_in_h(rng: np.random.Generator, draw_prior, draw_order) -> None:
    optimizer = TradeoffOptimizer(tol=1e-3)
    for _ in range(50):
        n, m = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        points = optimizer.tradeoff_curve(prior, order, "optimal")
        values = [point.min_eps for point in points]
        for previous, current in zip(values, values[1:]):
            assert current >= previous - 1e-3
        for point in points:
            assert point.witness is not None
            assert point.min_eps <= corollary_epsilon(prior, order, point.h) + 1e-9
            assert worst_case_pml(prior, point.witness) <= point.min_eps + 1e-6
            assert worst_case_order(point.witness, order) >= point.h


@pytest.mark.unit
def test__max_h_for_budget__stays_within_budget(rng: np.random.Generator, draw_prior, draw_order) -> None:
    for _ in range(100):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        eps = float(rng.uniform(0.0, 3.0))
        point = max_h_for_budget(prior, order, eps, "safe")
        assert point.min_eps <= eps + 1e-12
        if point.h < m:
            assert all(corollary_epsilon(prior, order, h) > eps for h in range(point.h + 1, m + 1))


@pytest.mark.functional
def test__min_epsilon__matches_brute_force_on_two_by_two(rng: np.random.Generator, draw_prior, draw_order) -> None:
    for _ in range(100):
        prior: Prior = draw_prior(rng, 2)
        order: UtilityOrder = draw_order(rng, 2, 2)
        h = int(rng.integers(1, 3))
        lp_min = min_epsilon(prior, order, h, "optimal", tol=1e-6).min_eps
        assert lp_min == pytest.approx(_grid_min_pml(prior, order, h, 100), abs=2e-6)


@pytest.mark.functional
def test__min_epsilon__never_above_brute_force_on_two_by_three(
    rng: np.random.Generator, draw_prior, draw_order
) -> None:
    close = 0
    for _ in range(100):
        prior: Prior = draw_prior(rng, 2)
        order: UtilityOrder = draw_order(rng, 2, 3)
        lp_min = min_epsilon(prior, order, 2, "optimal", tol=1e-6).min_eps
        grid_min = _grid_min_pml(prior, order, 2, 400)
        assert lp_min <= grid_min + 1e-6
        close += grid_min - lp_min <= 5e-2
    assert close >= 50


@pytest.mark.unit
def test__max_h_for_budget__monotone_in_budget(rng: np.random.Generator, draw_prior, draw_order) -> None:
    budgets = np.linspace(0.0, 4.0, 41)
    for _ in range(50):
        n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        thresholds = [max_h_for_budget(prior, order, float(eps), "safe").h for eps in budgets]
        assert thresholds == sorted(thresholds)


@pytest.mark.functional
def test__solve_feasibility__verdicts_match_brute_force(rng: np.random.Generator, draw_prior, draw_order) -> None:
    compared = 0
    while compared < 100:
        prior: Prior = draw_prior(rng, 2)
        order: UtilityOrder = draw_order(rng, 2, 2)
        h = int(rng.integers(1, 3))
        eps = float(rng.uniform(0.0, 1.5 * -math.log(prior.p_min)))
        grid_min = _grid_min_pml(prior, order, h, 100)
        if abs(eps - grid_min) <= 1e-6:
            continue
        result = solve_feasibility(build_program(prior, order, h, eps))
        assert result.feasible == (grid_min < eps)
        compared += 1


@pytest.mark.unit
def test__worst_case_pml__never_above_log_inverse_p_min(rng: np.random.Generator, draw_prior, draw_mechanism) -> None:
    for _ in range(300):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        prior: Prior = draw_prior(rng, n)
        mech: Mechanism = draw_mechanism(rng, n, m, zero_rate=float(rng.uniform(0.0, 0.9)))
        assert worst_case_pml(prior, mech) <= -math.log(prior.p_min) + 1e-9


@pytest.mark.unit
def test__decompose__residual_vanishes_only_for_flat_columns(rng: np.random.Generator, draw_prior) -> None:
    for _ in range(300):
        n = int(rng.integers(2, 7))
        prior: Prior = draw_prior(rng, n)
        column = rng.uniform(0.1, 0.9, size=n)
        column[rng.random(n) < 0.3] = 0.0
        positive = rng.permutation(n)[:2]
        column[positive[0]] = 0.6
        column[positive[1]] = 0.3
        unequal = Mechanism.from_array(np.column_stack([column, 1.0 - column]))
        assert decompose(prior, unequal, 0)[1] > 1e-6

        flat = np.where(column > 0.0, 0.4, 0.0)
        equal = Mechanism.from_array(np.column_stack([flat, 1.0 - flat]))
        assert decompose(prior, equal, 0)[1] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.unit
def test__utility_safe__every_posterior_ratio_within_corollary(
    rng: np.random.Generator, draw_prior, draw_order
) -> None:
    for _ in range(200):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        h = int(rng.integers(1, m + 1))
        bound = math.exp(corollary_epsilon(prior, order, h))
        mech = utility_safe(order, h)
        ratios = [
            float(posterior(prior, mech, j)[i] / prior.probs[i])
            for j in sorted(output_support(mech, prior))
            for i in range(n)
        ]
        assert all(ratio <= bound * (1.0 + 1e-8) for ratio in ratios)
        assert max(ratios) == pytest.approx(bound, rel=1e-8)


@pytest.mark.functional
def test__max_h_for_budget__optimal_monotone_in_budget(rng: np.random.Generator, draw_prior, draw_order) -> None:
    budgets = np.linspace(0.0, 2.5, 11)
    optimizer = TradeoffOptimizer(tol=1e-4)
    for _ in range(20):
        n, m = int(rng.integers(2, 4)), int(rng.integers(2, 5))
        prior: Prior = draw_prior(rng, n)
        order: UtilityOrder = draw_order(rng, n, m)
        points = [optimizer.max_h_for_budget(prior, order, float(eps), "optimal") for eps in budgets]
        thresholds = [point.h for point in points]
        assert thresholds == sorted(thresholds)
        for eps, point in zip(budgets, points):
            assert point.witness is not None
            assert worst_case_order(point.witness, order) >= point.h
            assert worst_case_pml(prior, point.witness) <= eps + 2e-4
