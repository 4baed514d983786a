import csv
import json
import typing as t
from logging import getLogger
from pathlib import Path

import numpy as np

from phaseseg.components.component import Component

logger = getLogger(__name__)

Row = t.Mapping[str, t.Any]

_PLOT_TEMPLATE = '''"""Plot {csv_name}. Generated by phaseseg; edit freely."""
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt({csv_name!r}, delimiter=",", names=True, dtype=None, encoding="utf-8")
fig, ax = plt.subplots()
for column in {y_columns!r}:
    ax.plot(data[{x_column!r}], data[column], marker=".", label=column)
ax.set_xlabel({x_column!r})
{log_scale}ax.legend(frameon=False)
fig.savefig({png_name!r}, dpi=200, bbox_inches="tight")
'''


def format_value(value: t.Any) -> str:
    """Floats at 17 significant digits, everything else via str()."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def to_jsonable(value: t.Any) -> t.Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan
        return value if np.isfinite(value) else repr(value)
    if isinstance(value, Path):
        return str(value)
    return value


class ArtifactStore:
    """Writes the files of one run into `output_dir` and keeps their manifest."""

    def __init__(self, output_dir: Path, plot_script: bool = False):
        self.output_dir = output_dir
        self.plot_script = plot_script
        self._manifest: t.List[str] = []

    @property
    def manifest(self) -> t.List[str]:
        return list(self._manifest)

    def _path(self, name: str) -> Path:
        if name in self._manifest:
            raise ValueError(f"artifact '{name}' is already written in this run")
        self._manifest.append(name)
        return self.output_dir / name

    def write_csv(
        self,
        name: str,
        rows: t.Sequence[Row],
        columns: t.Optional[t.Sequence[str]] = None,
        plot: t.Optional[t.Tuple[str, t.Sequence[str]]] = None,
        log_scale: bool = False,
    ) -> Path:
        columns = list(columns or (rows[0].keys() if rows else []))
        path = self._path(name)
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row.get(c)) for c in columns])
        logger.debug('wrote %s (%d rows)', path, len(rows))

        if plot is not None and self.plot_script:
            self.write_plot_script(name, plot[0], plot[1], log_scale=log_scale)
        return path

    def write_json(self, name: str, payload: t.Any) -> Path:
        path = self._path(name)
        path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.debug('wrote %s', path)
        return path

    def write_plot_script(
        self, csv_name: str, x_column: str, y_columns: t.Sequence[str], log_scale: bool = False
    ) -> Path:
        stem = Path(csv_name).stem
        path = self._path(f"plot_{stem}.py")
        path.write_text(
            _PLOT_TEMPLATE.format(
                csv_name=csv_name,
                x_column=x_column,
                y_columns=list(y_columns),
                png_name=f"{stem}.png",
                log_scale='ax.set_xscale("log")\nax.set_yscale("log")\n' if log_scale else "",
            ),
            encoding="utf-8",
        )
        return path


class ArtifactWriter(Component[ArtifactStore]):
    async def _start(self, output_dir: t.Union[str, Path], plot_script: bool = False, **_: t.Any) -> ArtifactStore:
        path = Path(output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return ArtifactStore(path, plot_script=plot_script)

    async def _stop(self) -> None:
        logger.debug('run artifacts: %s', ', '.join(self.obj.manifest) or '-')

    async def is_alive(self) -> bool:
        return self.obj.output_dir.is_dir()
