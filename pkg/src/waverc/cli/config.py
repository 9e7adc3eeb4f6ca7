"""TOML experiment configuration with a pinned schema version."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..medium import MediumConfig
from ..tasks import TaskSpec

__all__ = ["SCHEMA_VERSION", "ExperimentConfig", "load_config", "ConfigError"]

SCHEMA_VERSION = 1

DEFAULT_FIELDS = [0.0, 0.04, 0.08, 0.12, 0.16, 0.2]
DEFAULT_INTERVALS = [2.5, 3.75, 5.0, 7.5, 10.0]
DEFAULT_DETECTOR_MODES = ["a", "b", "both"]
DEFAULT_INTERFERENCE_MODES = [False, True]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything one run needs: medium, task, sweep grids, output."""

    medium: MediumConfig = field(default_factory=MediumConfig)
    task: TaskSpec = field(default_factory=TaskSpec)
    sweep_fields: list = field(default_factory=lambda: list(DEFAULT_FIELDS))
    sweep_intervals: list = field(default_factory=lambda: list(DEFAULT_INTERVALS))
    sweep_detector_modes: list = field(
        default_factory=lambda: list(DEFAULT_DETECTOR_MODES))
    sweep_interference_modes: list = field(
        default_factory=lambda: list(DEFAULT_INTERFERENCE_MODES))
    sweep_seeds: list = field(default_factory=lambda: [1])
    output_dir: str = "results"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version {self.schema_version} not supported; "
                f"this toolkit reads version {SCHEMA_VERSION}"
            )
        for name in ("sweep_fields", "sweep_intervals", "sweep_detector_modes",
                     "sweep_interference_modes", "sweep_seeds"):
            if not getattr(self, name):
                raise ConfigError(f"{name} grid must not be empty")
        for mode in self.sweep_detector_modes:
            if mode not in ("a", "b", "both"):
                raise ConfigError(f"unknown detector mode {mode!r}")

    def canonical_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "medium": asdict(self.medium),
            "task": asdict(self.task),
            "sweep": {
                "fields": self.sweep_fields,
                "intervals": self.sweep_intervals,
                "detector_modes": self.sweep_detector_modes,
                "interference_modes": self.sweep_interference_modes,
                "seeds": self.sweep_seeds,
            },
        }
        return json.dumps(payload, sort_keys=True)

    def digest(self) -> str:
        """Content hash keying the sweep's completed-cell store."""
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def _build_medium(raw: dict) -> MediumConfig:
    known = {f for f in MediumConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown medium keys: {sorted(unknown)}")
    if "exciter_ports" in raw:
        raw["exciter_ports"] = tuple(raw["exciter_ports"])
    if "detector_ports" in raw:
        raw["detector_ports"] = tuple(raw["detector_ports"])
    try:
        return MediumConfig(**raw)
    except ValueError as exc:
        raise ConfigError(f"medium: {exc}") from exc


def _build_task(raw: dict) -> TaskSpec:
    mapping = dict(raw)
    if "detectors" in mapping:
        mapping["detectors_used"] = mapping.pop("detectors")
    known = {f for f in TaskSpec.__dataclass_fields__}
    unknown = set(mapping) - known
    if unknown:
        raise ConfigError(f"unknown task keys: {sorted(unknown)}")
    try:
        return TaskSpec(**mapping)
    except ValueError as exc:
        raise ConfigError(f"task: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment file."""
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if "schema_version" not in raw:
        raise ConfigError(f"{path}: missing required schema_version")

    sweep = raw.get("sweep", {})
    known_sweep = {"fields", "intervals", "detector_modes", "interference_modes",
                   "seeds"}
    unknown = set(sweep) - known_sweep
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    out = raw.get("output", {})
    if set(out) - {"directory"}:
        raise ConfigError(f"unknown output keys: {sorted(set(out) - {'directory'})}")

    kwargs = dict(
        schema_version=raw["schema_version"],
        medium=_build_medium(dict(raw.get("medium", {}))),
        task=_build_task(dict(raw.get("task", {}))),
        output_dir=out.get("directory", "results"),
    )
    if "fields" in sweep:
        kwargs["sweep_fields"] = list(sweep["fields"])
    if "intervals" in sweep:
        kwargs["sweep_intervals"] = list(sweep["intervals"])
    if "detector_modes" in sweep:
        kwargs["sweep_detector_modes"] = list(sweep["detector_modes"])
    if "interference_modes" in sweep:
        kwargs["sweep_interference_modes"] = list(sweep["interference_modes"])
    if "seeds" in sweep:
        kwargs["sweep_seeds"] = list(sweep["seeds"])

    top_known = {"schema_version", "medium", "task", "sweep", "output"}
    unknown = set(raw) - top_known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    return ExperimentConfig(**kwargs)
