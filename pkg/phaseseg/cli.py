"""
Command line entry point: `phaseseg <command> [--flags] [--config FILE]`.

Exit status: 0 when every check passed, 1 on failed checks or a numerical
error, 2 on a usage error.
"""

import asyncio
import logging
import sys
import typing as t
from logging import getLogger

from phaseseg.app import ExperimentApp, RunReport
from phaseseg.config import ExperimentConfig, parse_config, usage
from phaseseg.errors import ConfigError, PhaseSegError

logger = getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


async def run(config: ExperimentConfig) -> RunReport:
    async with ExperimentApp(config) as app:
        return await app.execute(config)


def _log_level(argv: t.Sequence[str]) -> str:
    # уровень нужен до разбора конфига, чтобы предупреждения о флагах были видны
    for i, token in enumerate(argv):
        if token == "--log-level" and i + 1 < len(argv):
            return argv[i + 1].upper()
        if token.startswith("--log-level="):
            return token.split("=", 1)[1].upper()
    return "WARNING"


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = _log_level(argv)
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = parse_config(argv)
    except ConfigError as e:
        where = f" ({e.key})" if e.key else ""
        print(f"phaseseg: {e}{where}\n", file=sys.stderr)
        print(usage(), file=sys.stderr)
        return EXIT_USAGE

    try:
        report = asyncio.run(run(config))
    except PhaseSegError as e:
        print(f"phaseseg {config.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILED

    for name in report.failed:
        print(f"FAILED {name}", file=sys.stderr)
    print(f"{config.command}: {len(report.checks) - len(report.failed)}/{len(report.checks)} checks passed, "
          f"output in {config.output_dir}")
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
