"""
Component metadata, lifecycle states and declarative descriptors.

Компоненты эксперимента объявляются на классе приложения через `component(...)`.
SINGLETON живёт всё время работы приложения (пул воркеров), RUN создаётся
заново для каждого запуска эксперимента (артефакты, журнал проверок).
"""

import typing as t
from dataclasses import dataclass
from enum import Enum

from phaseseg.components.component import Component

ConfigDict = t.Dict[str, t.Any]
ComponentName = str
DependencyMap = t.Dict[str, str]


class ComponentStrategy(Enum):
    SINGLETON = "singleton"
    RUN = "run"


class ComponentState(Enum):
    REGISTERED = "registered"
    CONFIGURED = "configured"
    STARTED = "started"
    STOPPED = "stopped"
    ERROR = "error"


_TRANSITIONS: t.Dict[ComponentState, t.FrozenSet[ComponentState]] = {
    ComponentState.REGISTERED: frozenset({ComponentState.CONFIGURED, ComponentState.ERROR}),
    ComponentState.CONFIGURED: frozenset({ComponentState.STARTED, ComponentState.ERROR}),
    ComponentState.STARTED: frozenset({ComponentState.STOPPED, ComponentState.ERROR}),
    ComponentState.STOPPED: frozenset({ComponentState.CONFIGURED, ComponentState.STARTED, ComponentState.ERROR}),
    ComponentState.ERROR: frozenset(set(ComponentState) - {ComponentState.ERROR}),
}


@dataclass
class ComponentInfo:
    component_type: t.Type[Component]
    strategy: ComponentStrategy
    config_key: str
    dependencies: DependencyMap
    config: t.Optional[ConfigDict] = None
    state: ComponentState = ComponentState.REGISTERED

    def set_state(self, new: ComponentState) -> None:
        if self.state == new:
            return
        if new not in _TRANSITIONS[self.state]:
            raise RuntimeError(f"Invalid state {self.state} -> {new}")
        self.state = new


C = t.TypeVar("C", bound=Component)


class ComponentDescriptor(t.Generic[C]):
    """Declarative component slot; reading it on an app returns the live component."""

    def __init__(
        self,
        cls: t.Type[C],
        *,
        strategy: ComponentStrategy = ComponentStrategy.SINGLETON,
        config_key: str,
        dependencies: t.Optional[DependencyMap] = None,
    ):
        self.cls = cls
        self.strategy = strategy
        self.config_key = config_key
        self.dependencies: DependencyMap = dict(dependencies or {})
        self.name = ""

    def __set_name__(self, owner: type, name: str) -> None:
        self.name = name

    def __get__(self, instance: t.Any, owner: type) -> t.Any:
        if instance is None:
            return self
        return t.cast(C, instance._container.get_component(self.name))


def component(
    cls: t.Type[C],
    *,
    strategy: ComponentStrategy = ComponentStrategy.SINGLETON,
    config_key: str,
    dependencies: t.Optional[DependencyMap] = None,
) -> ComponentDescriptor[C]:
    return ComponentDescriptor(
        cls,
        strategy=strategy,
        config_key=config_key,
        dependencies=dependencies,
    )
