"""
Experiment application: components of a run and the run report.
"""

import time
import typing as t
from dataclasses import dataclass, field
from logging import getLogger

from phaseseg.base_app import BaseApp, ComponentsConfig
from phaseseg.component_manager import ComponentStrategy, component
from phaseseg.components import ArtifactWriter, Checks, WorkerPool
from phaseseg.config import ExperimentConfig
from phaseseg.errors import PhaseSegError
from phaseseg.pipelines import PIPELINES, RunContext

logger = getLogger(__name__)

REPORT_NAME = "report.json"


@dataclass
class RunReport:
    config: t.Dict[str, t.Any]
    duration: float
    checks: t.List[t.Dict[str, t.Any]]
    manifest: t.List[str]
    results: t.Dict[str, t.Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check["passed"] for check in self.checks)

    @property
    def failed(self) -> t.List[str]:
        return [check["name"] for check in self.checks if not check["passed"]]

    def as_dict(self) -> t.Dict[str, t.Any]:
        return {
            "config": self.config,
            "duration_seconds": self.duration,
            "passed": self.passed,
            "checks": self.checks,
            "manifest": self.manifest,
            "results": self.results,
        }


class ExperimentApp(BaseApp):
    pool = component(WorkerPool, config_key="pool")
    artifacts = component(ArtifactWriter, strategy=ComponentStrategy.RUN, config_key="artifacts")
    checks = component(Checks, strategy=ComponentStrategy.RUN, config_key="checks")

    def __init__(self, config: ExperimentConfig):
        self.config = config
        super().__init__(components_config=self.components_config(config))

    @staticmethod
    def components_config(config: ExperimentConfig) -> ComponentsConfig:
        return {
            "pool": {"executor": config.executor, "max_workers": config.workers},
            "artifacts": {"output_dir": config.output_dir, "plot_script": config.plot_script},
            "checks": {},
        }

    async def execute(self, config: t.Optional[ExperimentConfig] = None) -> RunReport:
        """
        Один запуск эксперимента в собственном run scope.

        `config` может отличаться от конфига приложения параметрами команды
        и каталогом вывода; пул воркеров общий.
        """
        config = config or self.config
        runner = PIPELINES.get(config.command)
        if runner is None:
            raise PhaseSegError(f"no pipeline for command {config.command!r}")

        started = time.perf_counter()
        ctx = {"artifacts": {"output_dir": config.output_dir, "plot_script": config.plot_script}}
        async with self.run_scope(ctx) as run:
            store, ledger = run.use("artifacts"), run.use("checks")
            try:
                results = await runner(RunContext(config, self.pool.obj, store, ledger))
            except PhaseSegError as e:
                logger.error("%s failed: %s", config.command, e)
                raise
            report = RunReport(
                config=config.echo(),
                duration=time.perf_counter() - started,
                checks=[record.as_dict() for record in ledger.records],
                manifest=store.manifest + [REPORT_NAME],
                results=results,
            )
            store.write_json(REPORT_NAME, report.as_dict())

        logger.info(
            "%s finished in %.2fs: %d checks, %d failed",
            config.command,
            report.duration,
            len(report.checks),
            len(report.failed),
        )
        return report
