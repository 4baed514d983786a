import inspect
import time
import typing as t
from abc import ABC, abstractmethod
from logging import getLogger

logger = getLogger(__name__)

T = t.TypeVar('T')

ConfigDict = t.Dict[str, t.Any]


class Component(ABC, t.Generic[T]):
    """
    Асинхронный компонент эксперимента.

    Подкласс реализует `_start(**config)`, возвращающий рабочий объект
    (пул, писатель артефактов, журнал проверок), и `_stop()`.
    Контейнер вызывает `configure` до `start`; объект доступен через
    `obj` только между start и stop.
    """

    def __init__(self) -> None:
        self._name = type(self).__name__
        self._config: t.Optional[ConfigDict] = None
        self._obj: t.Optional[T] = None
        self._started_at: t.Optional[float] = None

    @property
    def name(self) -> str:
        return self._name

    def configure(self, config: ConfigDict, name: t.Optional[str] = None) -> None:
        if self._started_at is not None:
            raise RuntimeError(f"Component '{self._name}' is running, stop it before reconfiguring")
        self._config = dict(config)
        if name:
            self._name = name

    @property
    def obj(self) -> T:
        if self._started_at is None:
            raise AttributeError(f"Component '{self._name}' is not started")
        return t.cast(T, self._obj)

    @property
    def started(self) -> bool:
        return self._started_at is not None

    @property
    def uptime(self) -> float:
        """Секунды с момента старта, 0 для остановленного компонента."""
        if self._started_at is None:
            return 0.0
        return time.perf_counter() - self._started_at

    async def start(self) -> None:
        if self._started_at is not None:
            return
        if self._config is None:
            raise RuntimeError(f"Config for component '{self._name}' is not set")
        try:
            self._obj = await self._start(**self._config)
        except Exception:
            logger.error("%s failed to start with keys %s", self._name, sorted(self._config))
            raise
        self._started_at = time.perf_counter()
        logger.debug("%s started", self._name)

    @abstractmethod
    async def _start(self, **kwargs: t.Any) -> T:
        """Строит рабочий объект из конфига и инъектированных зависимостей."""

    async def stop(self) -> None:
        if self._started_at is None:
            return
        lifetime = self.uptime
        try:
            await self._stop()
        finally:
            self._obj = None
            self._started_at = None
        logger.debug("%s stopped after %.3f s", self._name, lifetime)

    @abstractmethod
    async def _stop(self) -> None:
        """Освобождает ресурсы рабочего объекта."""

    async def is_alive(self) -> bool:
        return self._started_at is not None

    async def __aenter__(self) -> T:
        await self.start()
        return self.obj

    async def __aexit__(self, exc_type, exc_val, exc_tb) -> None:
        await self.stop()


async def _call_optional(obj: t.Any, method: str) -> t.Tuple[bool, t.Any]:
    fn = getattr(obj, method, None)
    if not callable(fn):
        return False, None
    value = fn()
    if inspect.isawaitable(value):
        value = await value
    return True, value


def create_component(cls: t.Type[T]) -> t.Type[Component[T]]:
    """
    Оборачивает обычный класс в компонент.

    Конфиг передаётся в конструктор как kwargs; `close()` и `is_alive()`
    объекта (синхронные или корутины) используются, если они есть,
    иначе живость определяет атрибут `closed`.
    """

    class _WrappedComponent(Component[T]):
        async def _start(self, **config_kwargs: t.Any) -> T:
            return cls(**config_kwargs)

        async def _stop(self) -> None:
            await _call_optional(self.obj, 'close')

        async def is_alive(self) -> bool:
            if not self.started:
                return False
            found, alive = await _call_optional(self.obj, 'is_alive')
            if found:
                return bool(alive)
            return not getattr(self.obj, 'closed', False)

    _WrappedComponent.__name__ = f"Component[{cls.__name__}]"
    _WrappedComponent.__qualname__ = f"Component[{cls.__name__}]"
    return _WrappedComponent
