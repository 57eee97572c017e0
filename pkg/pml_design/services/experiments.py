"""Built-in scenarios and the sampled / swept experiments behind the three figures.

The counting-query scenario drives the sampled worst-case utility experiment; the
4x4 cyclic order drives the two prior sweeps. Every table is a pure function of its
grid and seed: each (eps index, mechanism) pair draws from its own PCG64 substream.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Mapping, Optional, Sequence, TypeVar, Union

import numpy as np
import pandas as pd

from ..entities.model import Mechanism, Prior, Scenario, ScenarioLabels, UtilityOrder, UtilityValues
from ..entities.results import FigureCell, Mode, PatternKind, PriorPattern, RunRecord, TradeoffPoint
from ..errors import DegenerateBudgetError, InvalidInputError
from ..structured_logging import get_logger, submit_in_context
from .leakage import corollary_epsilon
from .mechanisms import (
    exponential_mechanism,
    ldp_budget,
    piecewise_safe_for_budget,
    randomized_response,
)
from .optimizer import ITradeoffOptimizer, TradeoffOptimizer
from .structure import worst_case_value

logger = get_logger("EXPERIMENTS")

T = TypeVar("T")

COUNTING_QUERY_VALUES = (
    (0, -1, -4, -9, -16, -25, -36),
    (-2, 0, -1, -4, -9, -16, -25),
    (-5, -2, 0, -1, -4, -9, -16),
    (-9, -5, -2, 0, -1, -4, -9),
    (-17, -9, -5, -2, 0, -1, -4),
    (-26, -17, -9, -5, -2, 0, -1),
    (-37, -26, -17, -9, -5, -2, 0),
)

COUNTING_QUERY_ORDER = (
    (7, 6, 5, 4, 3, 2, 1),
    (5, 7, 6, 4, 3, 2, 1),
    (3, 5, 7, 6, 4, 2, 1),
    (1, 3, 5, 7, 6, 4, 2),
    (1, 2, 3, 5, 7, 6, 4),
    (1, 2, 3, 4, 5, 7, 6),
    (1, 2, 3, 4, 5, 6, 7),
)

CYCLIC_ORDER = (
    (4, 3, 2, 1),
    (1, 4, 3, 2),
    (2, 1, 4, 3),
    (3, 2, 1, 4),
)

EXAMPLE1_ORDER = (
    (3, 2, 1),
    (1, 3, 2),
    (2, 1, 3),
)

FIG1_EPS_GRID = tuple(round(0.5 + 0.05 * k, 10) for k in range(31))
SWEEP_P_MIN_GRID = tuple(round(0.02 * k, 10) for k in range(1, 11))
NAIVE_THRESHOLDS = frozenset({1, 4})

# Baselines are undefined at eps >= -log p_min; they are evaluated just below it
CLAMP_MARGIN = 1e-6

SAFE = "utility_safe"
EXPONENTIAL = "exponential"
RANDOMIZED_RESPONSE = "randomized_response"
FIG1_MECHANISMS = (SAFE, EXPONENTIAL, RANDOMIZED_RESPONSE)


def _map(func: Callable[[int], T], items: Sequence[int], workers: int) -> list[T]:
    """Ordered map, threaded when more than one worker is requested."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [submit_in_context(pool, func, item) for item in items]
            return [future.result() for future in futures]
    return [func(item) for item in items]


def counting_query_scenario() -> Scenario:
    """Counting query over 6 records: 7 equally likely counts, quadratic loss with an under-report penalty."""
    letters = tuple(str(k) for k in range(7))
    return Scenario(
        prior=Prior.uniform(7),
        values=UtilityValues(values=tuple(tuple(float(v) for v in row) for row in COUNTING_QUERY_VALUES)),
        order=UtilityOrder(orders=COUNTING_QUERY_ORDER),
        labels=ScenarioLabels(inputs=letters, outputs=letters),
    )


def prior_from_pattern(pattern: PriorPattern, index: int = 0) -> Prior:
    """Prior generated by a pattern; ``index`` places the distinguished letter.

    For one-low-three-high the distinguished letter is the low one, for
    three-low-one-high it is the high one.
    """
    n = pattern.n
    if pattern.kind == "uniform":
        return Prior.uniform(n)
    if pattern.kind == "explicit":
        assert pattern.probs is not None
        return Prior(probs=pattern.probs)
    if not 0 <= index < n:
        raise InvalidInputError(f"distinguished letter {index} is outside [0, {n})")

    p = pattern.p_min
    if pattern.kind == "one-low-three-high":
        probs = np.full(n, (1.0 - p) / (n - 1))
        probs[index] = p
    else:
        probs = np.full(n, p)
        probs[index] = 1.0 - (n - 1) * p
    if (probs <= 0.0).any() or (probs >= 1.0).any():
        raise InvalidInputError(f"p_min={p} leaves a {pattern.kind} prior entry outside (0, 1)")
    return Prior.from_array(probs)


def cyclic_scenario(pattern: PriorPattern, index: int = 0) -> Scenario:
    """4x4 cyclic order, under which every input letter plays the same role."""
    if pattern.n != 4:
        raise InvalidInputError(f"the cyclic scenario has 4 input letters, pattern has n={pattern.n}")
    return Scenario(prior=prior_from_pattern(pattern, index), order=UtilityOrder(orders=CYCLIC_ORDER))


def example1_scenario(prior: Optional[Prior] = None) -> Scenario:
    """3x3 cyclic order on which dropping an output beats the utility-safe mechanism."""
    return Scenario(
        prior=prior or Prior(probs=(0.6, 0.25, 0.15)),
        order=UtilityOrder(orders=EXAMPLE1_ORDER),
    )


def _generator(seed: int, substream: Sequence[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *substream])))


def sample_min_utility(
    scenario: Scenario,
    mech: Mechanism,
    trials: int,
    seed: int,
    *,
    eps: float = math.nan,
    substream: Sequence[int] = (),
    name: Optional[str] = None,
) -> RunRecord:
    """Draw X from the prior and Y from the mechanism row, ``trials`` times, and keep the lowest utility."""
    if scenario.values is None:
        raise InvalidInputError("sampling utilities needs a scenario with utility values")
    if trials < 1:
        raise InvalidInputError(f"trials must be at least 1, got {trials}")
    values = scenario.values.array
    probs = mech.array
    if probs.shape != values.shape:
        raise InvalidInputError(f"mechanism shape {probs.shape} does not match utility values {values.shape}")

    rng = _generator(seed, substream)
    draws = rng.random((trials, 2))

    # Inverse CDF on normalized cumulative sums; zero-probability letters are never selected
    prior_cdf = np.cumsum(scenario.prior.array)
    prior_cdf /= prior_cdf[-1]
    xs = (prior_cdf[None, :] <= draws[:, :1]).sum(axis=1)
    row_cdf = np.cumsum(probs, axis=1)
    row_cdf /= row_cdf[:, -1:]
    ys = (row_cdf[xs] <= draws[:, 1:]).sum(axis=1)

    return RunRecord(
        eps=eps,
        mechanism_name=name or mech.builder,
        sample_min_utility=float(values[xs, ys].min()),
        deterministic_min_utility=worst_case_value(mech, scenario.values),
        trials=trials,
        seed=seed,
    )


def _fig1_row(scenario: Scenario, eps_index: int, eps: float, trials: int, seed: int) -> list[RunRecord]:
    assert scenario.values is not None
    p_min = scenario.prior.p_min
    records = []

    h, safe = piecewise_safe_for_budget(scenario.prior, scenario.order, eps)
    record = sample_min_utility(scenario, safe, trials, seed, eps=eps, substream=(eps_index, 0), name=SAFE)
    records.append(record.model_copy(update={"h": h}))

    clamped = False
    try:
        budget = ldp_budget(eps, p_min)
    except DegenerateBudgetError:
        clamped = True
        budget = ldp_budget(-math.log(p_min) - CLAMP_MARGIN, p_min)
        logger.debug("Baseline budget clamped", eps=eps, ldp=budget.value)

    baselines = (
        (EXPONENTIAL, exponential_mechanism(scenario.values, budget)),
        (RANDOMIZED_RESPONSE, randomized_response(scenario.values, budget)),
    )
    for offset, (name, mech) in enumerate(baselines, start=1):
        record = sample_min_utility(scenario, mech, trials, seed, eps=eps, substream=(eps_index, offset), name=name)
        records.append(record.model_copy(update={"clamped": clamped}))
    return records


def fig1_run(
    trials: int = 1000,
    seed: int = 0,
    scenario: Optional[Scenario] = None,
    eps_grid: Sequence[float] = FIG1_EPS_GRID,
    workers: int = 1,
) -> list[RunRecord]:
    """Sampled and exact minimum utility of the utility-safe, exponential and randomized-response mechanisms."""
    scenario = scenario or counting_query_scenario()
    if scenario.values is None:
        raise InvalidInputError("the sampling experiment needs a scenario with utility values")
    rows = _map(lambda k: _fig1_row(scenario, k, eps_grid[k], trials, seed), range(len(eps_grid)), workers)
    records = [record for row in rows for record in row]
    logger.info("Sampling experiment finished", points=len(eps_grid), records=len(records), trials=trials, seed=seed)
    return records


def _sweep(
    kind: PatternKind,
    optimizer: Optional[ITradeoffOptimizer],
    p_min_grid: Sequence[float],
    workers: int,
) -> list[FigureCell]:
    opt = optimizer or TradeoffOptimizer()
    modes: tuple[Mode, ...] = ("safe", "optimal")

    def run_row(k: int) -> list[FigureCell]:
        p_min = p_min_grid[k]
        scenario = cyclic_scenario(PriorPattern(kind=kind, p_min=p_min))
        cells = []
        for h in range(1, scenario.shape[1] + 1):
            for mode in modes:
                if mode == "safe":
                    min_eps = corollary_epsilon(scenario.prior, scenario.order, h)
                else:
                    min_eps = opt.min_epsilon(scenario.prior, scenario.order, h, mode).min_eps
                cells.append(FigureCell(p_min=p_min, h=h, mode=mode, min_eps=min_eps, naive=h in NAIVE_THRESHOLDS))
        logger.info("Prior sweep row finished", pattern=kind, p_min=p_min)
        return cells

    rows = _map(run_row, range(len(p_min_grid)), workers)
    return [cell for row in rows for cell in row]


def fig2_run(
    optimizer: Optional[ITradeoffOptimizer] = None,
    p_min_grid: Sequence[float] = SWEEP_P_MIN_GRID,
    workers: int = 1,
) -> list[FigureCell]:
    """Least leakage per threshold on the cyclic order with a one-low-three-high prior."""
    return _sweep("one-low-three-high", optimizer, p_min_grid, workers)


def fig3_run(
    optimizer: Optional[ITradeoffOptimizer] = None,
    p_min_grid: Sequence[float] = SWEEP_P_MIN_GRID,
    workers: int = 1,
) -> list[FigureCell]:
    """Least leakage per threshold on the cyclic order with a three-low-one-high prior."""
    return _sweep("three-low-one-high", optimizer, p_min_grid, workers)


def fig_tables_to_frame(rows: Union[Sequence[RunRecord], Sequence[FigureCell]]) -> pd.DataFrame:
    """Rows of either experiment as the DataFrame written to CSV."""
    if rows and isinstance(rows[0], RunRecord):
        return pd.DataFrame(
            [
                {
                    "eps": r.eps,
                    "mechanism": r.mechanism_name,
                    "sample_min": r.sample_min_utility,
                    "det_min": r.deterministic_min_utility,
                    "clamped": r.clamped,
                }
                for r in rows
                if isinstance(r, RunRecord)
            ],
            columns=["eps", "mechanism", "sample_min", "det_min", "clamped"],
        )
    return pd.DataFrame(
        [c.model_dump() for c in rows if isinstance(c, FigureCell)],
        columns=["p_min", "h", "mode", "min_eps", "naive"],
    )


CURVE_COLUMNS = ["h", "min_eps_nats", "mode", "witness_file", "failed", "error"]


def curve_to_frame(
    points: Sequence[TradeoffPoint], witness_files: Optional[Mapping[int, str]] = None
) -> pd.DataFrame:
    """Trade-off table; ``witness_files`` maps a threshold to the file holding its witness."""
    files = witness_files or {}
    return pd.DataFrame(
        [
            {
                "h": p.h,
                "min_eps_nats": p.min_eps,
                "mode": p.mode,
                "witness_file": files.get(p.h, ""),
                "failed": p.failed,
                "error": p.error or "",
            }
            for p in points
        ],
        columns=CURVE_COLUMNS,
    )


def experiment_metadata(
    figure: str,
    seed: int,
    trials: int,
    tolerances: dict[str, float],
    artifact_version: str,
) -> dict[str, object]:
    """Sidecar document recorded next to each figure table."""
    return {
        "figure": figure,
        "seed": seed,
        "trials": trials,
        "tolerances": dict(sorted(tolerances.items())),
        "artifact_version": artifact_version,
        "generator": "PCG64",
    }
