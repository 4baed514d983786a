from .artifacts import ArtifactStore, ArtifactWriter
from .checks import CheckLedger, CheckRecord, Checks
from .component import Component, create_component
from .pool import SweepExecutor, WorkerPool

__all__ = [
    "ArtifactStore",
    "ArtifactWriter",
    "CheckLedger",
    "CheckRecord",
    "Checks",
    "Component",
    "SweepExecutor",
    "WorkerPool",
    "create_component",
]
