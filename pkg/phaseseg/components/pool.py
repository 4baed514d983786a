import asyncio
import os
import typing as t
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from logging import getLogger

from phaseseg.components.component import Component

logger = getLogger(__name__)

EXECUTORS = ("thread", "process")

A = t.TypeVar("A")
R = t.TypeVar("R")


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, 4))


class SweepExecutor:
    """
    Bounded executor for parameter sweeps.

    `map_async` keeps input order. With `process` the function and its items
    must be picklable (module level functions, `functools.partial`).
    """

    def __init__(self, executor: Executor, kind: str, max_workers: int):
        self._executor = executor
        self.kind = kind
        self.max_workers = max_workers
        self.closed = False

    async def run(self, fn: t.Callable[..., R], *args: t.Any) -> R:
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self._executor, fn, *args)

    async def map_async(self, fn: t.Callable[[A], R], items: t.Iterable[A]) -> t.List[R]:
        items = list(items)
        logger.debug('sweep of %d items on %s pool (%d workers)', len(items), self.kind, self.max_workers)
        return list(await asyncio.gather(*(self.run(fn, item) for item in items)))

    def close(self) -> None:
        self._executor.shutdown(wait=True)
        self.closed = True


class WorkerPool(Component[SweepExecutor]):
    async def _start(self, executor: str = "thread", max_workers: t.Optional[int] = None, **_: t.Any) -> SweepExecutor:
        if executor not in EXECUTORS:
            raise ValueError(f"executor must be one of {EXECUTORS}, got {executor!r}")
        workers = max_workers or default_workers()
        pool_cls = ThreadPoolExecutor if executor == "thread" else ProcessPoolExecutor
        return SweepExecutor(pool_cls(max_workers=workers), executor, workers)

    async def _stop(self) -> None:
        await asyncio.get_running_loop().run_in_executor(None, self.obj.close)

    async def is_alive(self) -> bool:
        try:
            return not self.obj.closed
        except AttributeError:
            return False
