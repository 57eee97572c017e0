"""Local filesystem implementations of the repositories."""

import json
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, ValidationError

from pml_design.entities import (
    LeakageReport,
    Mechanism,
    MechanismDocument,
    Scenario,
    ScenarioDocument,
)
from pml_design.errors import ScenarioFileError
from pml_design.structured_logging import get_logger

from .base import BaseArtifactRepository, BaseScenarioRepository

logger = get_logger("REPOSITORY")

# Enough digits to reproduce a float64 exactly, so repeated runs write identical bytes
FLOAT_FORMAT = "%.17g"


def _describe(err: ValidationError) -> str:
    first = err.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "document"
    return f"invalid field '{field}': {first['msg']}"


def _read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as err:
        raise ScenarioFileError(str(path), "file not found") from err
    except json.JSONDecodeError as err:
        raise ScenarioFileError(str(path), f"malformed JSON at line {err.lineno}: {err.msg}") from err


def _write_json(payload: Any, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("File written", path=str(path))
    return path


def _validate(model: type[BaseModel], data: Any, path: Path) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as err:
        raise ScenarioFileError(str(path), _describe(err)) from err


class LocalScenarioRepository(BaseScenarioRepository):
    """JSON scenario and mechanism files on the local filesystem."""

    def read_scenario(self, path: Path) -> Scenario:
        doc: ScenarioDocument = _validate(ScenarioDocument, _read_json(path), path)
        data: dict[str, Any] = {"prior": {"probs": doc.prior}}
        if doc.utility_values is not None:
            data["values"] = {"values": doc.utility_values}
        if doc.utility_order is not None:
            data["order"] = {"orders": doc.utility_order}
        if doc.labels is not None:
            data["labels"] = doc.labels
        scenario: Scenario = _validate(Scenario, data, path)
        logger.debug("Scenario loaded", path=str(path), shape=scenario.shape)
        return scenario

    def write_scenario(self, scenario: Scenario, path: Path) -> Path:
        doc = ScenarioDocument(
            prior=list(scenario.prior.probs),
            utility_values=[list(row) for row in scenario.values.values] if scenario.values is not None else None,
            utility_order=[list(row) for row in scenario.order.orders],
            labels=scenario.labels,
        )
        return _write_json(doc.model_dump(exclude_none=True), path)

    def read_mechanism(self, path: Path) -> Mechanism:
        doc: MechanismDocument = _validate(MechanismDocument, _read_json(path), path)
        mech: Mechanism = _validate(
            Mechanism,
            {"probs": doc.probs, "builder": doc.builder, "parameters": doc.parameters},
            path,
        )
        return mech

    def write_mechanism(self, mech: Mechanism, path: Path) -> Path:
        doc = MechanismDocument(
            probs=[list(row) for row in mech.probs],
            builder=mech.builder,
            parameters=dict(mech.parameters),
        )
        return _write_json(doc.model_dump(), path)


class LocalArtifactRepository(BaseArtifactRepository):
    """CSV tables and JSON documents under one output directory."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = Path(out_dir)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_table(self, frame: pd.DataFrame, name: str) -> Path:
        path = self._path(name)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info("Table written", path=str(path), rows=len(frame))
        return path

    def write_document(self, document: dict[str, Any], name: str) -> Path:
        return _write_json(document, self._path(name))

    def write_report(self, report: LeakageReport, name: str) -> Path:
        return _write_json(report.model_dump(mode="json"), self._path(name))
