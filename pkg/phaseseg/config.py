"""
Experiment configuration: per-command schemas, flags and flat config files.

Конфиг-файл - плоский `key = value` без секций; флаги командной строки
перекрывают значения из файла. Неизвестный ключ - ошибка с именем ключа.
"""

import argparse
import configparser
import math
import os
import typing as t
from dataclasses import dataclass, field
from logging import getLogger
from pathlib import Path

from phaseseg.components.pool import EXECUTORS, default_workers
from phaseseg.errors import ConfigError

logger = getLogger(__name__)

OUTPUT_DIR_ENV = "PHASESEG_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

_FILE_SECTION = "run"


class _Required:
    def __repr__(self) -> str:
        return "REQUIRED"


REQUIRED: t.Any = _Required()


# ======================= Типы значений =======================


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def float_list(text: str) -> t.Tuple[float, ...]:
    items = tuple(float(x) for x in text.split(",") if x.strip())
    if not items:
        raise ValueError("empty list")
    return items


def int_list(text: str) -> t.Tuple[int, ...]:
    items = tuple(int(x) for x in text.split(",") if x.strip())
    if not items:
        raise ValueError("empty list")
    return items


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: t.Callable[[str], t.Any]
    default: t.Any = REQUIRED
    help: str = ""

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")

    @property
    def required(self) -> bool:
        return self.default is REQUIRED

    def convert(self, raw: t.Any) -> t.Any:
        if not isinstance(raw, str):
            return raw
        try:
            return self.type(raw)
        except ValueError as e:
            raise ConfigError(f"invalid value for {self.name}: {e}", key=self.name) from None


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


# ======================= Схемы команд =======================

COMMON: t.Tuple[ParamSpec, ...] = (
    ParamSpec("output_dir", str, None, f"output directory (default ${OUTPUT_DIR_ENV} or ./{DEFAULT_OUTPUT_DIR})"),
    ParamSpec("seed", int, 0, "seed of the randomized families"),
    ParamSpec("workers", int, None, "worker pool size (default: CPU count, at most 4)"),
    ParamSpec("executor", str, "thread", f"worker pool kind: {', '.join(EXECUTORS)}"),
    ParamSpec("plot_script", parse_bool, False, "also emit plot_<artifact>.py scripts"),
    ParamSpec("log_level", str, "WARNING", "logging level"),
)

SCHEMAS: t.Dict[str, t.Tuple[ParamSpec, ...]] = {
    "tf": (
        ParamSpec("alpha1", float, help="mass of the inner component"),
        ParamSpec("alpha2", float, help="mass of the outer component"),
        ParamSpec("g", float, help="intracomponent coupling of the second component"),
        ParamSpec("K", float, help="intercomponent coupling"),
        ParamSpec("step", float, 0.0, "radial quadrature step (0: R2/4096)"),
        ParamSpec("points", int, 513, "rows of the profile table"),
        ParamSpec("stability_samples", int, 20, "draws per randomized perturbation family"),
    ),
    "gp-minimize": (
        ParamSpec("alpha1", float, math.pi / 2),
        ParamSpec("alpha2", float, math.pi / 2),
        ParamSpec("g", float, 4.0),
        ParamSpec("K", float, 2.0),
        ParamSpec("epsilon_list", float_list, (0.2, 0.1, 0.05, 0.025), "comma separated epsilons"),
        ParamSpec("n", int, 256, "grid points per axis"),
        ParamSpec("schedule", str, "bb", "step schedule: armijo or bb"),
        ParamSpec("tol", float, 1e-6, "stationarity tolerance of the descent"),
        ParamSpec("max_iter", int, 5000),
        ParamSpec("min_rate", float, 0.25, "lower bound of the fitted log-log slope"),
        ParamSpec("decomposition", parse_bool, True, "run the energy decomposition check"),
        ParamSpec("decomposition_epsilon", float, 0.1),
        ParamSpec("decomposition_xi", float, 1.0, "xi of the crossover pair (g = 1 + eps xi)"),
        ParamSpec("decomposition_n", int, 64),
    ),
    "sigma1d": (
        ParamSpec("lambda", float, help="ratio of the kinetic coefficients, in (0, 1]"),
        ParamSpec("K", float, help="intercomponent coupling, K > 1"),
        ParamSpec("n", int, 8001),
        ParamSpec("L", float, 0.0, "half width of the interval (0: automatic)"),
        ParamSpec("rescaled", parse_bool, False, "use the weak segregation scaling"),
        ParamSpec("polish", parse_bool, False, "refine with the boundary value solver"),
        ParamSpec("tol", float, 1e-12),
        ParamSpec("equipartition_tol", float, 1e-4),
    ),
    "sigma-sweep": (
        ParamSpec("lambda", float_list, help="comma separated lambdas"),
        ParamSpec("K_list", float_list, help="comma separated K values"),
        ParamSpec("n", int, 8001),
        ParamSpec("weak_threshold", float, 0.5, "K - 1 at or below which the rescaled form is used"),
        ParamSpec("polish", parse_bool, False),
        ParamSpec("equipartition_tol", float, 1e-4),
        ParamSpec("infinity_tol", float, 1e-3, "absolute tolerance of the split-domain check"),
        ParamSpec("weak_rtol", float, 0.02, "relative tolerance of the weak limit extrapolation"),
    ),
    "shape-stability": (
        ParamSpec("R_min", float, 1.05),
        ParamSpec("R_max", float, 2.5),
        ParamSpec("R_count", int, 291),
        ParamSpec("k_max", int, 6),
        ParamSpec("threshold_tol", float, 1e-3),
        ParamSpec("fuglede_R", float_list, (1.2, 1.7, 2.2)),
        ParamSpec("fuglede_k", int_list, (2, 3, 4)),
        ParamSpec("fuglede_t", float_list, (1e-2, 1e-3)),
        ParamSpec("fuglede_rtol", float, 0.1),
        ParamSpec("R", float, 1.5, "support radius of the shape statistics"),
        ParamSpec("samples", int, 200, "random volume-matched shapes"),
        ParamSpec("amplitude", float, 0.05),
        ParamSpec("constant_rtol", float, 0.2, "allowed drift of c and C when the sample doubles"),
        ParamSpec("band", float, 10.0, "allowed spread of F / V^(5/6) over the tangent balls"),
        ParamSpec("symdiff_eps", float, 0.05, "cap on symdiff / V for the instability constant"),
        ParamSpec("poincare_delta", float_list, (0.1, 0.01), "comma separated deltas of the Poincare sweep"),
    ),
    "shape-regimes": (
        ParamSpec("R", float, 1.5),
        ParamSpec("alpha1", float, 0.0, "volume of the first phase (0: half the total mass)"),
        ParamSpec("sigma_K", float, 1.0, "surface tension in front of the perimeter"),
        ParamSpec("xi_list", float_list, (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)),
        ParamSpec("convention", str, "half", "coefficient in front of xi: half or full"),
        ParamSpec("count", int, 8, "members per parametric family"),
    ),
    "crossover-check": (
        ParamSpec("R", float, 1.5),
        ParamSpec("alpha1", float, 0.0),
        ParamSpec("sigma_K", float, 1.0),
        ParamSpec("convention", str, "half"),
        ParamSpec("count", int, 8),
        ParamSpec("margin", float, 1.1, "xi above the estimate checked for the ball"),
    ),
}

COMMANDS = tuple(SCHEMAS)


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    parameters: t.Mapping[str, t.Any]
    output_dir: Path
    seed: int = 0
    workers: int = field(default_factory=default_workers)
    executor: str = "thread"
    plot_script: bool = False
    log_level: str = "WARNING"

    def __post_init__(self) -> None:
        schema = SCHEMAS.get(self.command)
        if schema is None:
            raise ConfigError(f"unknown command {self.command!r}", key="command")
        known = {spec.name for spec in schema}
        for key in self.parameters:
            if key not in known:
                raise ConfigError(f"unknown parameter {key!r} for {self.command}", key=key)
        for spec in schema:
            if spec.required and spec.name not in self.parameters:
                raise ConfigError(f"missing required parameter {spec.name!r}", key=spec.name)
        if self.executor not in EXECUTORS:
            raise ConfigError(f"executor must be one of {EXECUTORS}", key="executor")
        if self.workers < 1:
            raise ConfigError("workers must be positive", key="workers")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigError(f"log level must be one of {LOG_LEVELS}", key="log_level")

    def __getitem__(self, key: str) -> t.Any:
        return self.parameters[key]

    def echo(self) -> t.Dict[str, t.Any]:
        return {
            "command": self.command,
            "parameters": dict(self.parameters),
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "workers": self.workers,
            "executor": self.executor,
            "plot_script": self.plot_script,
        }


def build_config(command: str, values: t.Mapping[str, t.Any], environ: t.Optional[t.Mapping[str, str]] = None) -> ExperimentConfig:
    """Typed config from raw string (or already typed) values, defaults filled in."""
    environ = os.environ if environ is None else environ
    schema = {spec.name: spec for spec in SCHEMAS.get(command, ())}
    common = {spec.name: spec for spec in COMMON}
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}", key="command")

    parameters: t.Dict[str, t.Any] = {}
    ambient: t.Dict[str, t.Any] = {name: spec.default for name, spec in common.items()}
    for raw_key, raw in values.items():
        key = normalize_key(raw_key)
        if key in common:
            ambient[key] = common[key].convert(raw)
        elif key in schema:
            parameters[key] = schema[key].convert(raw)
        else:
            raise ConfigError(f"unknown parameter {raw_key!r} for {command}", key=raw_key)
    for name, spec in schema.items():
        if name not in parameters and not spec.required:
            parameters[name] = spec.default

    output_dir = ambient["output_dir"] or environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
    return ExperimentConfig(
        command=command,
        parameters=parameters,
        output_dir=Path(output_dir),
        seed=ambient["seed"],
        workers=ambient["workers"] or default_workers(),
        executor=ambient["executor"],
        plot_script=ambient["plot_script"],
        log_level=str(ambient["log_level"]).upper(),
    )


# ======================= Файл и флаги =======================


def read_config_file(path: t.Union[str, Path]) -> t.Dict[str, str]:
    """Flat `key = value` file; `#` and `;` start comment lines."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}", key="config") from None
    try:
        parser.read_string(f"[{_FILE_SECTION}]\n{text}", source=str(path))
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key {e.option!r} in {path}", key=e.option) from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config file {path}: {e}", key="config") from None
    return dict(parser.items(_FILE_SECTION))


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> t.NoReturn:
        raise ConfigError(message, key=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="phaseseg", description="Phase segregation experiments.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for command, schema in SCHEMAS.items():
        cmd = sub.add_parser(command, help=f"run the {command} pipeline")
        cmd.add_argument("--config", default=None, help="flat key = value file")
        for spec in COMMON + schema:
            # все значения строками: типы и умолчания применяет build_config
            cmd.add_argument(
                spec.flag,
                dest=spec.name,
                default=argparse.SUPPRESS,
                help=f"{spec.help} (default: {spec.default!r})" if not spec.required else f"{spec.help} (required)",
            )
    return parser


def _warn_duplicates(argv: t.Sequence[str]) -> None:
    seen: t.Set[str] = set()
    for token in argv:
        if not token.startswith("--"):
            continue
        flag = token.split("=", 1)[0]
        if flag in seen:
            logger.warning("flag %s given more than once, the last occurrence wins", flag)
        seen.add(flag)


def parse_config(
    argv: t.Optional[t.Sequence[str]] = None,
    environ: t.Optional[t.Mapping[str, str]] = None,
) -> ExperimentConfig:
    argv = list(argv or [])
    parser = build_parser()
    if not argv:
        raise ConfigError("no command given", key="command")

    namespace, unknown = parser.parse_known_args(argv)
    if namespace.command is None:
        raise ConfigError("no command given", key="command")
    if unknown:
        key = next((u for u in unknown if u.startswith("-")), unknown[0])
        raise ConfigError(f"unknown argument {key!r}", key=normalize_key(key.split("=", 1)[0]))
    _warn_duplicates(argv)

    flags = vars(namespace)
    command = flags.pop("command")
    config_path = flags.pop("config", None)
    values: t.Dict[str, t.Any] = {}
    if config_path:
        values.update({normalize_key(k): v for k, v in read_config_file(config_path).items()})
    values.update(flags)
    return build_config(command, values, environ)


def usage() -> str:
    return build_parser().format_help()
