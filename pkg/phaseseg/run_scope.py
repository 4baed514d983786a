"""
Run scope: изоляция RUN компонентов одного запуска эксперимента.
"""

import typing as t
from contextvars import ContextVar, Token
from logging import getLogger

from phaseseg.component_manager import ComponentName, ComponentState, ComponentStrategy, ConfigDict
from phaseseg.components.component import Component

if t.TYPE_CHECKING:
    from phaseseg.base_app import BaseApp

logger = getLogger(__name__)

ScopeCache = t.Dict[ComponentName, Component]

_run_scope_var: ContextVar[t.Optional[ScopeCache]] = ContextVar("_run_scope", default=None)


class RunScope:
    """
    Async context manager одного запуска.

    При входе создаёт и запускает все RUN компоненты в топологическом порядке;
    `ctx` задаёт переопределения конфига по `config_key`
    (например, `{"artifacts": {"output_dir": ...}}`). При выходе компоненты
    останавливаются в обратном порядке, даже если запуск упал.
    """

    def __init__(self, app: "BaseApp", ctx: t.Optional[t.Dict[str, ConfigDict]] = None):
        self.app = app
        self.ctx = dict(ctx or {})
        self.cache: ScopeCache = {}
        self._token: t.Optional[Token] = None
        self._order: t.List[ComponentName] = []

    async def __aenter__(self) -> "RunScope":
        container = self.app._container
        self._token = _run_scope_var.set(self.cache)
        try:
            for name in container.get_topological_order(ComponentStrategy.RUN):
                info = container.components[name]
                inst = info.component_type()
                inst.configure(
                    container.build_config(name, scope=self.cache, overrides=self.ctx.get(info.config_key)),
                    name=name,
                )
                self.cache[name] = inst
                try:
                    await inst.start()
                except Exception:
                    info.set_state(ComponentState.ERROR)
                    raise
                info.set_state(ComponentState.STARTED)
                self._order.append(name)
        except Exception:
            await self._close()
            raise
        return self

    async def __aexit__(self, exc_type, exc, tb) -> None:
        await self._close()

    async def _close(self) -> None:
        container = self.app._container
        for name in reversed(self._order):
            comp = self.cache.get(name)
            if comp is not None and comp.started:
                await comp.stop()
                container.components[name].set_state(ComponentState.STOPPED)
        self._order.clear()
        self.cache.clear()
        if self._token is not None:
            _run_scope_var.reset(self._token)
            self._token = None

    def get(self, name: ComponentName) -> Component:
        if name not in self.cache:
            raise RuntimeError(f"RUN component '{name}' not found in scope")
        return self.cache[name]

    def use(self, name: ComponentName) -> t.Any:
        return self.get(name).obj


def get_run_scope() -> t.Optional[ScopeCache]:
    return _run_scope_var.get()
