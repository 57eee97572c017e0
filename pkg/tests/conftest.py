"""Shared test fixtures for the entire test suite."""

from typing import Callable

import numpy as np
import pytest

from pml_design.entities import Mechanism, Prior, Scenario, UtilityOrder
from pml_design.services.experiments import counting_query_scenario, example1_scenario
from pml_design.services.mechanisms import example1_mechanism


def _random_prior(rng: np.random.Generator, n: int, floor: float = 0.02) -> Prior:
    """Full-support prior with every entry at least ``floor / n``."""
    raw = rng.dirichlet(np.ones(n))
    probs = (1.0 - floor) * raw + floor / n
    probs[-1] = 1.0 - probs[:-1].sum()
    return Prior.from_array(probs)


def _random_order(rng: np.random.Generator, n: int, m: int) -> UtilityOrder:
    return UtilityOrder.from_array(np.array([rng.permutation(m) + 1 for _ in range(n)]))


def _random_mechanism(rng: np.random.Generator, n: int, m: int, zero_rate: float = 0.3) -> Mechanism:
    """Row-stochastic table with some exact zeros and at least one positive entry per row."""
    probs = rng.random((n, m))
    probs[rng.random((n, m)) < zero_rate] = 0.0
    for i in range(n):
        if not (probs[i] > 0.0).any():
            probs[i, rng.integers(m)] = 1.0
    probs /= probs.sum(axis=1, keepdims=True)
    return Mechanism.from_array(probs)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so property suites are reproducible."""
    return np.random.default_rng(20240917)


@pytest.fixture
def draw_prior() -> Callable[..., Prior]:
    return _random_prior


@pytest.fixture
def draw_order() -> Callable[..., UtilityOrder]:
    return _random_order


@pytest.fixture
def draw_mechanism() -> Callable[..., Mechanism]:
    return _random_mechanism


@pytest.fixture
def counting_scenario() -> Scenario:
    return counting_query_scenario()


@pytest.fixture
def example1_prior() -> Prior:
    return Prior(probs=(0.6, 0.25, 0.15))


@pytest.fixture
def example1(example1_prior: Prior) -> Scenario:
    return example1_scenario(example1_prior)


@pytest.fixture
def example1_fixture_mechanism(example1_prior: Prior) -> Mechanism:
    return example1_mechanism(example1_prior)


@pytest.fixture
def uniform_cyclic_order() -> UtilityOrder:
    return UtilityOrder(orders=((4, 3, 2, 1), (1, 4, 3, 2), (2, 1, 4, 3), (3, 2, 1, 4)))
