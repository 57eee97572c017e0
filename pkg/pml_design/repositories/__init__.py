"""Repository implementations for scenario, mechanism and artifact files."""

from .base import BaseArtifactRepository, BaseScenarioRepository
from .local import LocalArtifactRepository, LocalScenarioRepository

__all__ = [
    "BaseArtifactRepository",
    "BaseScenarioRepository",
    "LocalArtifactRepository",
    "LocalScenarioRepository",
]
