"""Result records and emission: canonical JSON, CSV series, and figures.

Outputs are byte-deterministic for a fixed config and seed: floats are
serialized with repr (shortest round-trip), dictionary order is explicit, and
figure rendering uses the Agg backend with fixed metadata.  Wall time is
reported on stderr only, never in the emitted files.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import PolyergoError


def jsonable(value):
    """Recursively convert numpy scalars/arrays and complex values to JSON types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    return str(value)


@dataclass
class Series:
    """A named table: ordered column names plus rows of plain numbers."""

    columns: list
    rows: list
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False

    def as_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            cells = []
            for v in row:
                if isinstance(v, float):
                    cells.append(repr(v))
                else:
                    cells.append(str(v))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


@dataclass
class ResultRecord:
    """One experiment run: identity, scalar outputs, and series tables."""

    experiment_id: str
    config: ExperimentConfig
    outputs: dict
    series: dict = field(default_factory=dict)
    passed: bool = True
    wall_time: float = 0.0

    def as_json(self) -> str:
        doc = {
            "config": {
                "ini": self.config.to_ini(),
                "digest": self.config.digest(),
            },
            "results": {
                "experiment_id": self.experiment_id,
                "passed": bool(self.passed),
                "outputs": jsonable(self.outputs),
                "series": {name: s.columns for name, s in sorted(self.series.items())},
            },
            "version": __version__,
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _render_figure(series: Series, path: Path, title: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [row[0] for row in series.rows]
    numeric_x = all(isinstance(v, (int, float)) for v in xs)
    xplot = xs if numeric_x else np.arange(len(xs))
    for col in range(1, len(series.columns)):
        ys = [row[col] for row in series.rows]
        if not all(isinstance(v, (int, float)) for v in ys):
            continue
        if series.logy:
            ax.semilogy(xplot, ys, marker="o", ms=3, lw=1, label=series.columns[col])
        else:
            ax.plot(xplot, ys, marker="o", ms=3, lw=1, label=series.columns[col])
    if not numeric_x:
        ax.set_xticks(xplot)
        ax.set_xticklabels([str(v) for v in xs], rotation=45, fontsize=7)
    ax.set_xlabel(series.xlabel or series.columns[0])
    ax.set_ylabel(series.ylabel)
    ax.set_title(title, fontsize=10)
    if len(series.columns) > 2:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def emit(records, outdir, plot: bool = True) -> list:
    """Write one JSON per record plus CSV (and PNG) files per series.

    Returns the list of written paths.  Field ordering and float formatting
    are fixed, so identical records produce identical bytes.
    """
    if not records:
        raise PolyergoError("nothing to emit")
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for rec in records:
            jpath = out / f"{rec.experiment_id}.json"
            jpath.write_text(rec.as_json())
            written.append(jpath)
            for name, series in sorted(rec.series.items()):
                cpath = out / f"{rec.experiment_id}__{name}.csv"
                cpath.write_text(series.as_csv())
                written.append(cpath)
                if plot and series.rows:
                    ppath = out / f"{rec.experiment_id}__{name}.png"
                    _render_figure(series, ppath, f"{rec.experiment_id}: {name}")
                    written.append(ppath)
            print(
                f"[polyergo] {rec.experiment_id}: wall={rec.wall_time:.3f}s "
                f"passed={rec.passed} -> {jpath}",
                file=sys.stderr,
            )
        return written
    except OSError as exc:
        raise exc
