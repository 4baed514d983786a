"""
Dependency injection container for experiment components.

Регистрирует компоненты приложения, проверяет граф зависимостей,
создаёт экземпляры и собирает их конфиг с `.obj` запущенных зависимостей.
"""

import typing as t
from logging import getLogger

from phaseseg.component_manager import (
    ComponentDescriptor,
    ComponentInfo,
    ComponentName,
    ComponentState,
    ComponentStrategy,
    ConfigDict,
)
from phaseseg.components.component import Component

if t.TYPE_CHECKING:
    from phaseseg.base_app import BaseApp

logger = getLogger(__name__)

ScopeCache = t.Dict[ComponentName, Component]
Visitor = t.Callable[[ComponentName, ComponentInfo], None]


class DIContainer:

    def __init__(
        self,
        app: "BaseApp",
        components: t.Dict[ComponentName, ComponentDescriptor],
        config: ConfigDict,
        scope_getter: t.Optional[t.Callable[[], t.Optional[ScopeCache]]] = None,
    ):
        self.app = app
        self._components: t.Dict[ComponentName, ComponentInfo] = {}
        self._instances: t.Dict[ComponentName, Component] = {}
        self._get_scope = scope_getter or (lambda: None)
        self.register(components, config)
        self.validate_dependency_graph()

    @property
    def components(self) -> t.Dict[ComponentName, ComponentInfo]:
        return self._components

    def register(self, components: t.Dict[ComponentName, ComponentDescriptor], config: ConfigDict) -> None:
        for name, d in components.items():
            if name in self._components:
                raise ValueError(f"Duplicate component name: {name}")
            info = ComponentInfo(
                component_type=d.cls,
                strategy=d.strategy,
                config_key=d.config_key,
                dependencies=dict(d.dependencies),
                config=dict(config.get(d.config_key) or {}),
            )
            info.set_state(ComponentState.CONFIGURED)
            self._components[name] = info

    # ======================= Граф зависимостей =======================

    def _traverse(
        self,
        start_nodes: t.Iterable[ComponentName],
        *,
        same_strategy_only: bool = False,
        check_cycles: bool = False,
        on_visit: t.Optional[Visitor] = None,
        on_complete: t.Optional[Visitor] = None,
    ) -> None:
        """
        Обход графа в глубину.

        `on_complete` вызывается после всех зависимостей узла, так что порядок
        вызовов топологический. С `same_strategy_only` рёбра в компоненты другой
        стратегии не обходятся.
        """
        visited: t.Set[ComponentName] = set()
        path: t.List[ComponentName] = []

        def dfs(name: ComponentName) -> None:
            if check_cycles and name in path:
                cycle = " -> ".join(path[path.index(name):] + [name])
                raise RuntimeError(f"Circular dependency detected: {cycle}")
            if name in visited:
                return
            if name not in self._components:
                raise ValueError(f"Unknown component '{name}'")

            info = self._components[name]
            path.append(name)
            if on_visit:
                on_visit(name, info)

            for param_name, dep_name in info.dependencies.items():
                dep_info = self._components.get(dep_name)
                if dep_info is None:
                    raise ValueError(
                        f"Unknown dependency '{dep_name}' for component '{name}' "
                        f"(parameter: '{param_name}')"
                    )
                if same_strategy_only and dep_info.strategy != info.strategy:
                    continue
                dfs(dep_name)

            path.pop()
            visited.add(name)
            if on_complete:
                on_complete(name, info)

        for name in start_nodes:
            dfs(name)

    def validate_dependency_graph(self) -> None:
        """Unknown dependencies, cycles and SINGLETON -> RUN edges are rejected."""

        def check_rules(name: ComponentName, info: ComponentInfo) -> None:
            if info.strategy != ComponentStrategy.SINGLETON:
                return
            for dep_name in info.dependencies.values():
                dep_info = self._components.get(dep_name)
                if dep_info is not None and dep_info.strategy == ComponentStrategy.RUN:
                    raise RuntimeError(
                        f"SINGLETON component '{name}' cannot depend on RUN component '{dep_name}'"
                    )

        self._traverse(list(self._components), check_cycles=True, on_visit=check_rules)

    def get_dependencies_topological_order(
        self,
        component_name: ComponentName,
        strategy_filter: t.Optional[ComponentStrategy] = None,
    ) -> t.List[ComponentName]:
        """Транзитивные зависимости компонента (без него самого), зависимости раньше зависимых."""
        if component_name not in self._components:
            raise ValueError(f"Unknown component '{component_name}'")

        result: t.List[ComponentName] = []

        def collect(name: ComponentName, info: ComponentInfo) -> None:
            if name != component_name and (strategy_filter is None or info.strategy == strategy_filter):
                result.append(name)

        self._traverse([component_name], on_complete=collect)
        return result

    def get_topological_order(self, strategy: t.Optional[ComponentStrategy] = None) -> t.List[ComponentName]:
        if strategy is None:
            raise ValueError("strategy must be specified (SINGLETON or RUN)")

        result: t.List[ComponentName] = []
        nodes = [name for name, info in self._components.items() if info.strategy == strategy]
        self._traverse(nodes, same_strategy_only=True, on_complete=lambda name, _: result.append(name))
        return result

    # ======================= Экземпляры =======================

    def _create(self, component_name: ComponentName, scope: t.Optional[ScopeCache]) -> Component:
        info = self._components[component_name]
        inst = info.component_type()
        inst.configure(self.build_config(component_name, scope=scope), name=component_name)
        return inst

    def peek(self, component_name: ComponentName) -> t.Optional[Component]:
        """Уже созданный SINGLETON или None."""
        return self._instances.get(component_name)

    def get_component(self, component_name: ComponentName, scope: t.Optional[ScopeCache] = None) -> Component:
        """
        SINGLETON берётся из кэша контейнера, RUN из кэша текущего запуска.

        Экземпляр создаётся без запуска; RUN вне `RunScope` недоступен.
        """
        info = self._components.get(component_name)
        if info is None:
            raise ValueError(f"Unknown component '{component_name}'")

        if info.strategy == ComponentStrategy.SINGLETON:
            if component_name not in self._instances:
                self._instances[component_name] = self._create(component_name, scope=None)
            return self._instances[component_name]

        if info.strategy == ComponentStrategy.RUN:
            if scope is None:
                scope = self._get_scope()
            if scope is None:
                raise RuntimeError(f"RUN component '{component_name}' can only be accessed within run scope")
            if component_name not in scope:
                scope[component_name] = self._create(component_name, scope=scope)
            return scope[component_name]

        raise RuntimeError(f"Unknown component strategy: {info.strategy}")

    def build_config(
        self,
        component_name: ComponentName,
        scope: t.Optional[ScopeCache] = None,
        overrides: t.Optional[ConfigDict] = None,
    ) -> ConfigDict:
        """
        Конфиг компонента: базовый из `config_key`, поверх него `overrides`
        и `.obj` запущенных зависимостей под именами параметров.
        """
        info = self._components[component_name]
        cfg = dict(info.config or {})
        cfg.update(overrides or {})

        for param_name, dep_name in info.dependencies.items():
            dep_info = self._components[dep_name]
            if dep_info.strategy == ComponentStrategy.SINGLETON:
                dep = self.get_component(dep_name)
            elif scope is None:
                raise RuntimeError(
                    f"Component '{component_name}' cannot resolve RUN dependency '{dep_name}' without scope"
                )
            else:
                dep = self.get_component(dep_name, scope=scope)

            if not dep.started:
                raise RuntimeError(f"Dependency '{dep_name}' for component '{component_name}' is not started")
            cfg[param_name] = dep.obj

        return cfg
