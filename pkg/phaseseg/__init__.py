"""
phaseseg - численная библиотека и CLI для сегрегации фаз в двухкомпонентных конденсатах.

Замкнутые профили Томаса-Ферми, минимизация функционала Гросса-Питаевского,
поверхностное натяжение одномерного перехода и весовые изопериметрические
функционалы. Эксперименты запускаются через компонентное приложение
(`ExperimentApp`) с DI контейнером и run scope.
"""

from phaseseg.app import ExperimentApp, RunReport
from phaseseg.base_app import BaseApp
from phaseseg.component_manager import ComponentDescriptor, ComponentStrategy, component
from phaseseg.config import ExperimentConfig, parse_config
from phaseseg.di_container import DIContainer
from phaseseg.errors import (
    ConfigError,
    DomainError,
    PhaseSegError,
    PreconditionError,
    QuadratureError,
    SolverError,
)
from phaseseg.run_scope import RunScope

__all__ = [
    "BaseApp",
    "ComponentDescriptor",
    "ComponentStrategy",
    "ConfigError",
    "DIContainer",
    "DomainError",
    "ExperimentApp",
    "ExperimentConfig",
    "PhaseSegError",
    "PreconditionError",
    "QuadratureError",
    "RunReport",
    "RunScope",
    "SolverError",
    "component",
    "parse_config",
]
