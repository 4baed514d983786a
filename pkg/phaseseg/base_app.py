"""
Base application: declarative components, DI container and run scope.
"""

import typing as t
from logging import getLogger

from phaseseg.component_manager import ComponentDescriptor, ComponentName, ComponentState, ComponentStrategy
from phaseseg.di_container import DIContainer
from phaseseg.run_scope import RunScope, get_run_scope

logger = getLogger(__name__)

ComponentsConfig = t.Dict[str, t.Dict[str, t.Any]]


class BaseApp:
    def __init__(self, *, components_config: ComponentsConfig):
        # наследники могут переопределять компоненты базового класса
        descriptors: t.Dict[ComponentName, ComponentDescriptor] = {}
        for cls in reversed(type(self).mro()):
            for name, attr in vars(cls).items():
                if isinstance(attr, ComponentDescriptor):
                    descriptors[name] = attr

        self._descriptors = descriptors
        self._container = DIContainer(
            app=self,
            components=descriptors,
            config=components_config,
            scope_getter=get_run_scope,
        )

    async def start(self) -> None:
        """
        Запускает SINGLETON компоненты в топологическом порядке.

        При ошибке останавливает уже запущенные и поднимает RuntimeError.
        """
        try:
            for name in self._container.get_topological_order(ComponentStrategy.SINGLETON):
                comp = self._container.get_component(name)
                if comp.started:
                    continue
                try:
                    await comp.start()
                except Exception:
                    self._container.components[name].set_state(ComponentState.ERROR)
                    raise
                self._container.components[name].set_state(ComponentState.STARTED)
        except Exception as e:
            await self.stop()
            raise RuntimeError(f"App start failed: {e}") from e

    async def stop(self) -> None:
        for name in reversed(self._container.get_topological_order(ComponentStrategy.SINGLETON)):
            comp = self._container.peek(name)
            if comp is None or not comp.started:
                continue
            await comp.stop()
            self._container.components[name].set_state(ComponentState.STOPPED)

    async def healthcheck(self) -> t.Dict[str, bool]:
        """Статус каждого SINGLETON компонента; не запущенный считается нездоровым."""
        result: t.Dict[str, bool] = {}
        for name, info in self._container.components.items():
            if info.strategy != ComponentStrategy.SINGLETON:
                continue
            comp = self._container.peek(name)
            result[name] = bool(comp is not None and comp.started and await comp.is_alive())
        return result

    def run_scope(self, ctx: t.Optional[t.Dict[str, t.Dict[str, t.Any]]] = None) -> RunScope:
        """
        Scope одного запуска эксперимента.

        Пример:
            async with app.run_scope({"artifacts": {"output_dir": "runs/tf"}}) as run:
                writer = run.use("artifacts")
        """
        return RunScope(self, ctx)

    async def __aenter__(self) -> "BaseApp":
        await self.start()
        return self

    async def __aexit__(self, exc_type, exc, tb) -> None:
        await self.stop()
