"""Experiment configuration: a sectioned key-value text format with lossless round-trip."""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

SUBCOMMANDS = (
    "variation",
    "oscillation",
    "rm-check",
    "gluing",
    "splitting-check",
    "multiplier",
    "decay-scan",
    "offdiag-scan",
    "cancellation",
    "ergodic-run",
    "radon-run",
    "osc-stats",
)


@dataclass
class ExperimentConfig:
    """Everything a runner invocation needs, round-trippable through INI text.

    ``extra`` holds subcommand-specific keys (k0, L, J, rho, ...) as strings;
    numeric fields are validated on construction and on load.
    """

    subcommand: str
    seed: int = 2025
    trials: int = 100
    budget: int = 6
    tolerance: float = 1e-9
    out: str = ""
    plot: bool = True
    matrix: list | None = None
    axes: list | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.budget, int) or self.budget < 1:
            raise ConfigError(f"budget must be a positive integer, got {self.budget!r}")
        if not np.isfinite(self.tolerance) or self.tolerance <= 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.matrix is not None:
            rows = [[int(v) for v in row] for row in self.matrix]
            if not rows or any(len(r) != len(rows[0]) for r in rows):
                raise ConfigError("matrix rows must be nonempty and rectangular")
            if any(v < 0 for r in rows for v in r):
                raise ConfigError("matrix entries must be nonnegative integers")
            self.matrix = rows
        if self.axes is not None:
            axes = [[float(v) for v in ax] for ax in self.axes]
            for ax in axes:
                if not ax or any(b <= a for a, b in zip(ax, ax[1:])) or ax[0] <= 0:
                    raise ConfigError("grid axes must be strictly increasing and positive")
            self.axes = axes

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        clean = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **clean)

    def to_ini(self) -> str:
        # output destination and figure toggle are delivery options and stay
        # out of the canonical form, so reruns into different directories
        # produce identical bytes
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["experiment"] = {
            "subcommand": self.subcommand,
            "seed": str(self.seed),
            "trials": str(self.trials),
            "budget": str(self.budget),
            "tolerance": repr(self.tolerance),
        }
        if self.matrix is not None:
            cp["matrix"] = {"rows": "; ".join(" ".join(str(v) for v in r) for r in self.matrix)}
        if self.axes is not None:
            cp["grid"] = {
                f"axis{i + 1}": " ".join(repr(v) for v in ax)
                for i, ax in enumerate(self.axes)
            }
        if self.extra:
            cp["extra"] = {k: str(v) for k, v in sorted(self.extra.items())}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @staticmethod
    def from_ini(text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"unparseable config: {exc}") from exc
        if "experiment" not in cp:
            raise ConfigError("config must contain an [experiment] section")
        exp = cp["experiment"]
        if "subcommand" not in exp:
            raise ConfigError("config must name a subcommand")
        try:
            matrix = None
            if "matrix" in cp and cp["matrix"].get("rows"):
                matrix = [
                    [int(v) for v in row.split()]
                    for row in cp["matrix"]["rows"].split(";")
                ]
            axes = None
            if "grid" in cp:
                axes = [
                    [float(v) for v in cp["grid"][key].split()]
                    for key in sorted(cp["grid"], key=lambda s: int(s.replace("axis", "")))
                ]
            return ExperimentConfig(
                subcommand=exp["subcommand"],
                seed=int(exp.get("seed", "2025")),
                trials=int(exp.get("trials", "100")),
                budget=int(exp.get("budget", "6")),
                tolerance=float(exp.get("tolerance", "1e-9")),
                matrix=matrix,
                axes=axes,
                extra=dict(cp["extra"]) if "extra" in cp else {},
            )
        except (ValueError, ConfigError) as exc:
            raise ConfigError(str(exc)) from exc

    def digest(self) -> str:
        return hashlib.sha256(self.to_ini().encode()).hexdigest()[:16]
