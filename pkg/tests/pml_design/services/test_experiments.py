import math

import numpy as np
import pandas as pd
import pytest

from pml_design.entities import FigureCell, Mechanism, PriorPattern, RunRecord, Scenario
from pml_design.entities.results import PatternKind
from pml_design.errors import InvalidInputError
from pml_design.services.experiments import (
    FIG1_EPS_GRID,
    SWEEP_P_MIN_GRID,
    curve_to_frame,
    cyclic_scenario,
    experiment_metadata,
    fig1_run,
    fig2_run,
    fig3_run,
    fig_tables_to_frame,
    prior_from_pattern,
    sample_min_utility,
)
from pml_design.services.leakage import corollary_epsilon
from pml_design.services.mechanisms import utility_safe
from pml_design.services.optimizer import tradeoff_curve

FIG2_SAFE_H3 = [
    1.05939158, 1.02165125, 0.9852836, 0.95019228, 0.91629073,
    0.88350091, 0.85175221, 0.82098055, 0.79112759, 0.76214005,
]  # fmt: skip
FIG2_SAFE_H2 = [
    0.39551478, 0.38566248, 0.37590631, 0.36624439, 0.35667494,
    0.34719620, 0.33780646, 0.32850407, 0.31928741, 0.31015493,
]  # fmt: skip
FIG2_OPTIMAL_H3 = [
    1.05939865, 1.02165222, 0.98529816, 0.95020294, 0.91630936,
    0.88350296, 0.85176468, 0.82099915, 0.79113007, 0.76215744,
]  # fmt: skip
FIG2_OPTIMAL_H2 = [
    0.39552689, 0.38566589, 0.37591934, 0.36624908, 0.35669327,
    0.34721375, 0.33781052, 0.32852173, 0.31929016, 0.31017303,
]  # fmt: skip
FIG3_SAFE_H3 = [
    3.21887582, 2.52572864, 2.12026354, 1.83258146, 1.60943791,
    1.42711636, 1.27296568, 1.13943428, 1.02165125, 0.91629073,
]  # fmt: skip
FIG3_SAFE_H2 = [
    2.81341072, 2.12026354, 1.71479843, 1.42711636, 1.2039728,
    1.02165125, 0.86750057, 0.73396918, 0.61618614, 0.51082562,
]  # fmt: skip
FIG3_OPTIMAL_H3 = [
    3.2188797, 2.52573013, 2.12026596, 1.83259964, 1.60943985,
    1.42711639, 1.27298355, 1.13945007, 1.02165222, 0.91630936,
]  # fmt: skip
FIG3_OPTIMAL_H2 = 0.40548325


def _column(cells: list[FigureCell], h: int, mode: str) -> list[float]:
    return [cell.min_eps for cell in cells if cell.h == h and cell.mode == mode]


@pytest.fixture(scope="module")
def fig2_cells() -> list[FigureCell]:
    return fig2_run()


@pytest.fixture(scope="module")
def fig3_cells() -> list[FigureCell]:
    return fig3_run()


@pytest.fixture(scope="module")
def fig1_records() -> list[RunRecord]:
    return fig1_run(trials=1000, seed=0)


@pytest.mark.unit
def test__prior_from_pattern__one_low_three_high() -> None:
    prior = prior_from_pattern(PriorPattern(kind="one-low-three-high", p_min=0.1), index=2)
    np.testing.assert_allclose(prior.array, [0.3, 0.3, 0.1, 0.3])


@pytest.mark.unit
def test__prior_from_pattern__three_low_one_high() -> None:
    prior = prior_from_pattern(PriorPattern(kind="three-low-one-high", p_min=0.1), index=1)
    np.testing.assert_allclose(prior.array, [0.1, 0.7, 0.1, 0.1])


@pytest.mark.unit
def test__prior_from_pattern__explicit_and_uniform() -> None:
    assert prior_from_pattern(PriorPattern(kind="explicit", probs=(0.2, 0.8), n=2)).probs == (0.2, 0.8)
    assert prior_from_pattern(PriorPattern(kind="uniform", n=5)).p_min == pytest.approx(0.2)


@pytest.mark.unit
def test__prior_from_pattern__index_out_of_range() -> None:
    with pytest.raises(InvalidInputError, match="outside"):
        prior_from_pattern(PriorPattern(kind="one-low-three-high", p_min=0.1), index=4)


@pytest.mark.unit
def test__cyclic_scenario__requires_four_letters() -> None:
    with pytest.raises(InvalidInputError, match="4 input letters"):
        cyclic_scenario(PriorPattern(kind="uniform", n=3))


@pytest.mark.unit
def test__cyclic_scenario__order_and_fig2_point() -> None:
    scenario = cyclic_scenario(PriorPattern(kind="one-low-three-high", p_min=0.06))
    assert scenario.order.orders[2] == (2, 1, 4, 3)
    assert corollary_epsilon(scenario.prior, scenario.order, 3) == pytest.approx(0.98528, abs=1e-4)


@pytest.mark.unit
@pytest.mark.parametrize("kind", ["one-low-three-high", "three-low-one-high"])
def test__cyclic_scenario__letters_are_interchangeable(kind: PatternKind) -> None:
    scenarios = [cyclic_scenario(PriorPattern(kind=kind, p_min=0.08), index) for index in range(4)]
    for h in (2, 3):
        values = [corollary_epsilon(s.prior, s.order, h) for s in scenarios]
        assert max(values) - min(values) < 1e-12


@pytest.mark.unit
def test__cyclic_scenario__uniform_tradeoff() -> None:
    scenario = cyclic_scenario(PriorPattern(kind="uniform"))
    points = tradeoff_curve(scenario.prior, scenario.order, "safe")
    assert points[1].min_eps == pytest.approx(math.log(4 / 3), abs=1e-12)
    assert points[2].min_eps == pytest.approx(math.log(2), abs=1e-12)


@pytest.mark.unit
def test__sample_min_utility__deterministic_mechanism(counting_scenario: Scenario) -> None:
    for seed in (0, 1, 99):
        record = sample_min_utility(counting_scenario, utility_safe(counting_scenario.order, 7), 200, seed)
        assert record.sample_min_utility == 0.0
        assert record.deterministic_min_utility == 0.0


@pytest.mark.unit
def test__sample_min_utility__single_trial_hits_support(counting_scenario: Scenario) -> None:
    assert counting_scenario.values is not None
    mech = utility_safe(counting_scenario.order, 3)
    record = sample_min_utility(counting_scenario, mech, 1, 5)
    support_values = counting_scenario.values.array[mech.array > 0.0]
    assert record.sample_min_utility in set(support_values.tolist())
    assert record.trials == 1


@pytest.mark.unit
def test__sample_min_utility__converges_to_support_minimum(counting_scenario: Scenario) -> None:
    record = sample_min_utility(counting_scenario, utility_safe(counting_scenario.order, 3), 100_000, 0)
    assert record.sample_min_utility == record.deterministic_min_utility == -17.0


@pytest.mark.unit
def test__sample_min_utility__never_below_support_minimum(
    rng: np.random.Generator, draw_mechanism, counting_scenario: Scenario
) -> None:
    for seed in range(30):
        mech: Mechanism = draw_mechanism(rng, 7, 7)
        record = sample_min_utility(counting_scenario, mech, int(rng.integers(1, 300)), seed)
        assert record.sample_min_utility >= record.deterministic_min_utility


@pytest.mark.unit
def test__sample_min_utility__requires_values(example1: Scenario, example1_fixture_mechanism: Mechanism) -> None:
    with pytest.raises(InvalidInputError, match="utility values"):
        sample_min_utility(example1, example1_fixture_mechanism, 10, 0)


@pytest.mark.functional
def test__fig1_run__safe_steps(fig1_records: list[RunRecord]) -> None:
    safe = {r.eps: r.deterministic_min_utility for r in fig1_records if r.mechanism_name == "utility_safe"}
    assert len(safe) == len(FIG1_EPS_GRID) == 31
    for eps, worst in safe.items():
        if eps < 0.85:
            assert worst == -37.0
        elif eps < 1.30:
            assert worst == -17.0
        elif eps < 1.95:
            assert worst == -5.0
        else:
            assert worst == 0.0


@pytest.mark.functional
def test__fig1_run__baselines_stay_at_global_minimum(fig1_records: list[RunRecord]) -> None:
    baselines = [r for r in fig1_records if r.mechanism_name != "utility_safe"]
    assert {r.mechanism_name for r in baselines} == {"exponential", "randomized_response"}
    for record in baselines:
        assert record.deterministic_min_utility == -37.0
        assert record.sample_min_utility >= -37.0
        assert record.clamped == (record.eps >= math.log(7))


@pytest.mark.functional
def test__fig1_run__same_seed_same_table() -> None:
    first = fig_tables_to_frame(fig1_run(trials=200, seed=3))
    second = fig_tables_to_frame(fig1_run(trials=200, seed=3, workers=4))
    pd.testing.assert_frame_equal(first, second)


@pytest.mark.functional
def test__fig2_run__safe_values(fig2_cells: list[FigureCell]) -> None:
    assert len(fig2_cells) == len(SWEEP_P_MIN_GRID) * 4 * 2
    np.testing.assert_allclose(_column(fig2_cells, 3, "safe"), FIG2_SAFE_H3, atol=1e-6)
    np.testing.assert_allclose(_column(fig2_cells, 2, "safe"), FIG2_SAFE_H2, atol=1e-6)


@pytest.mark.functional
def test__fig2_run__safe_closed_forms(fig2_cells: list[FigureCell]) -> None:
    p = np.array(SWEEP_P_MIN_GRID)
    np.testing.assert_allclose(_column(fig2_cells, 3, "safe"), -np.log(p + (1 - p) / 3), atol=1e-12)
    np.testing.assert_allclose(_column(fig2_cells, 2, "safe"), -np.log(1 - (1 - p) / 3), atol=1e-12)


@pytest.mark.functional
def test__fig2_run__optimal_values(fig2_cells: list[FigureCell]) -> None:
    np.testing.assert_allclose(_column(fig2_cells, 3, "optimal"), FIG2_OPTIMAL_H3, atol=1e-3)
    np.testing.assert_allclose(_column(fig2_cells, 2, "optimal"), FIG2_OPTIMAL_H2, atol=1e-3)
    for h in (2, 3):
        gap = np.array(_column(fig2_cells, h, "optimal")) - np.array(_column(fig2_cells, h, "safe"))
        assert gap.max() <= 1e-6


@pytest.mark.functional
def test__fig2_run__naive_flags(fig2_cells: list[FigureCell]) -> None:
    assert {cell.h for cell in fig2_cells if cell.naive} == {1, 4}
    assert {cell.h for cell in fig2_cells if not cell.naive} == {2, 3}


@pytest.mark.functional
def test__fig3_run__safe_values(fig3_cells: list[FigureCell]) -> None:
    p = np.array(SWEEP_P_MIN_GRID)
    np.testing.assert_allclose(_column(fig3_cells, 3, "safe"), FIG3_SAFE_H3, atol=1e-6)
    np.testing.assert_allclose(_column(fig3_cells, 2, "safe"), FIG3_SAFE_H2, atol=1e-6)
    np.testing.assert_allclose(_column(fig3_cells, 3, "safe"), -np.log(2 * p), atol=1e-12)
    np.testing.assert_allclose(_column(fig3_cells, 2, "safe"), -np.log(3 * p), atol=1e-12)


@pytest.mark.functional
def test__fig3_run__optimal_gap(fig3_cells: list[FigureCell]) -> None:
    optimal_h2 = np.array(_column(fig3_cells, 2, "optimal"))
    safe_h2 = np.array(_column(fig3_cells, 2, "safe"))
    np.testing.assert_allclose(optimal_h2, FIG3_OPTIMAL_H2, atol=1e-3)
    below = np.array(SWEEP_P_MIN_GRID) <= 0.18 + 1e-12
    assert (safe_h2[below] - optimal_h2[below] >= 0.1).all()
    np.testing.assert_allclose(_column(fig3_cells, 3, "optimal"), FIG3_OPTIMAL_H3, atol=1e-3)


@pytest.mark.unit
def test__fig_tables_to_frame__columns() -> None:
    cells = [FigureCell(p_min=0.02, h=2, mode="safe", min_eps=0.4, naive=False)]
    assert list(fig_tables_to_frame(cells).columns) == ["p_min", "h", "mode", "min_eps", "naive"]
    record = RunRecord(
        eps=0.5, mechanism_name="exponential", sample_min_utility=-26, deterministic_min_utility=-37, trials=5, seed=0
    )
    assert list(fig_tables_to_frame([record]).columns) == ["eps", "mechanism", "sample_min", "det_min", "clamped"]


@pytest.mark.unit
def test__curve_to_frame__one_row_per_threshold(counting_scenario: Scenario) -> None:
    frame = curve_to_frame(tradeoff_curve(counting_scenario.prior, counting_scenario.order, "safe"), {3: "w3.json"})
    assert list(frame.columns) == ["h", "min_eps_nats", "mode", "witness_file", "failed", "error"]
    assert frame["h"].tolist() == list(range(1, 8))
    assert frame["witness_file"].tolist() == ["", "", "w3.json", "", "", "", ""]
    assert not frame["failed"].any()


@pytest.mark.unit
def test__experiment_metadata__records_run_settings() -> None:
    doc = experiment_metadata("fig1", 0, 1000, {"witness_tol": 1e-6, "bisection_tol": 1e-6}, "1")
    assert doc["seed"] == 0
    assert doc["trials"] == 1000
    assert list(doc["tolerances"]) == ["bisection_tol", "witness_tol"]  # type: ignore
