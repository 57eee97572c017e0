"""Abstract base classes for repository implementations."""

import abc
from pathlib import Path
from typing import Any

import pandas as pd

from pml_design.entities import LeakageReport, Mechanism, Scenario


class BaseScenarioRepository(abc.ABC):
    """Abstract base class for scenario and mechanism file storage."""

    @abc.abstractmethod
    def read_scenario(self, path: Path) -> Scenario:
        raise NotImplementedError

    @abc.abstractmethod
    def write_scenario(self, scenario: Scenario, path: Path) -> Path:
        raise NotImplementedError

    @abc.abstractmethod
    def read_mechanism(self, path: Path) -> Mechanism:
        raise NotImplementedError

    @abc.abstractmethod
    def write_mechanism(self, mech: Mechanism, path: Path) -> Path:
        raise NotImplementedError


class BaseArtifactRepository(abc.ABC):
    """Abstract base class for result tables, reports and sidecar documents."""

    @abc.abstractmethod
    def write_table(self, frame: pd.DataFrame, name: str) -> Path:
        raise NotImplementedError

    @abc.abstractmethod
    def write_document(self, document: dict[str, Any], name: str) -> Path:
        raise NotImplementedError

    @abc.abstractmethod
    def write_report(self, report: LeakageReport, name: str) -> Path:
        raise NotImplementedError
