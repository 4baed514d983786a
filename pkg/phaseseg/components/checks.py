import typing as t
from dataclasses import asdict, dataclass
from logging import getLogger

import numpy as np

from phaseseg.components.component import create_component
from phaseseg.errors import PreconditionError

logger = getLogger(__name__)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    value: t.Any
    tolerance: t.Any
    detail: str = ""

    def as_dict(self) -> t.Dict[str, t.Any]:
        return asdict(self)


class CheckLedger:
    """Acceptance checks of one run; each name is recorded exactly once."""

    def __init__(self, **_: t.Any):
        self._records: t.Dict[str, CheckRecord] = {}

    def record(self, name: str, passed: t.Any, value: t.Any = None, tolerance: t.Any = None, detail: str = "") -> bool:
        if name in self._records:
            raise PreconditionError(f"check '{name}' is already recorded")
        rec = CheckRecord(name, bool(passed), value, tolerance, detail)
        self._records[name] = rec
        if rec.passed:
            logger.debug('check %s passed (value=%s, tolerance=%s)', name, value, tolerance)
        else:
            logger.warning('check %s failed (value=%s, tolerance=%s) %s', name, value, tolerance, detail)
        return rec.passed

    def at_most(self, name: str, value: float, bound: float, detail: str = "") -> bool:
        return self.record(name, bool(np.isfinite(value) and value <= bound), value, bound, detail)

    def at_least(self, name: str, value: float, bound: float, detail: str = "") -> bool:
        return self.record(name, bool(np.isfinite(value) and value >= bound), value, bound, detail)

    def close_to(self, name: str, value: float, expected: float, atol: float = 0.0, rtol: float = 0.0) -> bool:
        tol = atol + rtol * abs(expected)
        return self.record(
            name, bool(abs(value - expected) <= tol), value, tol, detail=f"expected {expected!r}"
        )

    @property
    def records(self) -> t.List[CheckRecord]:
        return list(self._records.values())

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self._records.values())

    def close(self) -> None:
        failed = [r.name for r in self._records.values() if not r.passed]
        if failed:
            logger.info('%d of %d checks failed: %s', len(failed), len(self._records), ', '.join(failed))


Checks = create_component(CheckLedger)
