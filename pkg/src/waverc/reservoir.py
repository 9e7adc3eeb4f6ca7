"""Virtual-node extraction: detector traces -> state matrix X_i(k)."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .medium import DriveSignal, FieldState, MediumConfig, simulate

__all__ = [
    "NodeExtractionSpec",
    "StateMatrix",
    "MinMaxSigmoid",
    "collect_states",
    "normalize_and_activate",
]

_DETECTOR_CHOICES = ("a", "b", "both")


@dataclass(frozen=True)
class NodeExtractionSpec:
    """How detector traces become virtual nodes.

    ``nodes_per_input_step`` equally spaced samples are taken from each
    detector trace within every input interval; the last sample sits at
    the end of the interval.  ``detectors_used`` is "a", "b" or "both";
    with both, node columns are detector-A nodes followed by detector-B
    nodes.  ``interference`` records whether one or two exciters are
    driven and is validated against the drive plan.
    """

    nodes_per_input_step: int = 50
    detectors_used: str = "both"
    interference: bool = True

    def __post_init__(self):
        if self.nodes_per_input_step < 1:
            raise ValueError("nodes_per_input_step must be at least 1")
        if self.detectors_used not in _DETECTOR_CHOICES:
            raise ValueError(
                f"detectors_used must be one of {_DETECTOR_CHOICES}, "
                f"got {self.detectors_used!r}"
            )

    @property
    def detector_indices(self) -> tuple[int, ...]:
        return {"a": (0,), "b": (1,), "both": (0, 1)}[self.detectors_used]

    @property
    def node_count(self) -> int:
        return self.nodes_per_input_step * len(self.detector_indices)


@dataclass
class StateMatrix:
    """T x n matrix of virtual-node values with per-column metadata.

    ``nodes`` holds one (detector_label, offset_within_interval) pair
    per column, in column order.
    """

    values: np.ndarray
    nodes: list[tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("state matrix must be two-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("state matrix contains non-finite entries")
        if self.nodes and len(self.nodes) != self.values.shape[1]:
            raise ValueError("node metadata length must match column count")

    @property
    def num_steps(self) -> int:
        return self.values.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.values.shape[1]

    def column_names(self) -> list[str]:
        if self.nodes:
            return [f"det{d}_off{o}" for d, o in self.nodes]
        return [f"node{i}" for i in range(self.num_nodes)]

    def to_csv(self, path) -> None:
        """Write `step, <node columns>` rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step"] + self.column_names())
            for k in range(self.num_steps):
                writer.writerow([k] + [repr(v) for v in self.values[k]])


def node_offsets(steps_per_input: int, nodes_per_input_step: int) -> list[int]:
    """Equally spaced sample offsets inside one input interval.

    The last offset is always the final step of the interval, matching
    a read-out "after each pulse train".
    """
    m = nodes_per_input_step
    if m > steps_per_input:
        raise ValueError(
            f"cannot place {m} distinct nodes in an interval of "
            f"{steps_per_input} steps"
        )
    return [((j + 1) * steps_per_input) // m - 1 for j in range(m)]


def collect_states(cfg: MediumConfig, drive_plan: list[DriveSignal],
                   spec: NodeExtractionSpec, num_steps: int,
                   initial: FieldState | None = None) -> StateMatrix:
    """Run the medium over the drive plan and sample virtual nodes.

    ``drive_plan`` must drive two distinct exciters when
    ``spec.interference`` is set and exactly one otherwise.  The drives
    must span an integer number ``steps_per_input`` of medium steps per
    input step, with ``steps_per_input >= spec.nodes_per_input_step``.
    """
    if not drive_plan:
        raise ValueError("drive plan is empty")
    ports = sorted({d.port for d in drive_plan})
    if spec.interference and ports != [0, 1]:
        raise ValueError("interference extraction requires drives on both exciters")
    if not spec.interference and len(ports) != 1:
        raise ValueError("non-interference extraction requires a single driven exciter")
    if num_steps < 1:
        raise ValueError("num_steps must be positive")

    total = max(int(round(d.duration / cfg.dt)) for d in drive_plan)
    if total % num_steps != 0:
        raise ValueError(
            f"drive length of {total} medium steps is not divisible by "
            f"{num_steps} input steps"
        )
    spi = total // num_steps
    offs = node_offsets(spi, spec.nodes_per_input_step)

    traces = simulate(cfg, drive_plan, total * cfg.dt, initial=initial)
    cols = []
    meta = []
    labels = {0: "a", 1: "b"}
    for det in spec.detector_indices:
        per_step = traces[det].reshape(num_steps, spi)
        for off in offs:
            cols.append(per_step[:, off])
            meta.append((labels[det], off))
    return StateMatrix(values=np.stack(cols, axis=1), nodes=meta)


class MinMaxSigmoid:
    """Column-wise min-max to [0, 1] followed by a logistic sigmoid.

    Fit on training states; the scaling constants persist so test states
    are mapped with the training statistics.  A constant training column
    maps to sigmoid(0.5) and emits a warning.
    """

    def __init__(self):
        self.lo: np.ndarray | None = None
        self.span: np.ndarray | None = None

    def fit(self, values: np.ndarray) -> "MinMaxSigmoid":
        values = np.asarray(values, dtype=np.float64)
        self.lo = values.min(axis=0)
        hi = values.max(axis=0)
        self.span = hi - self.lo
        degenerate = self.span <= 0
        if np.any(degenerate):
            warnings.warn(
                f"{int(degenerate.sum())} constant column(s) mapped to sigmoid(0.5)",
                RuntimeWarning,
                stacklevel=2,
            )
        return self

    def transform(self, values: np.ndarray) -> np.ndarray:
        if self.lo is None:
            raise RuntimeError("scaler has not been fitted")
        values = np.asarray(values, dtype=np.float64)
        degenerate = self.span <= 0
        span = np.where(degenerate, 1.0, self.span)
        scaled = (values - self.lo) / span
        scaled[:, degenerate] = 0.5
        return 1.0 / (1.0 + np.exp(-scaled))


def normalize_and_activate(
    X: StateMatrix, scaler: MinMaxSigmoid | None = None
) -> tuple[StateMatrix, MinMaxSigmoid]:
    """Min-max normalise per column (training stats) and apply a sigmoid.

    Pass the scaler returned from the training call when transforming
    test-set states.
    """
    if X.num_steps == 0:
        raise ValueError("state matrix is empty")
    if scaler is None:
        scaler = MinMaxSigmoid().fit(X.values)
    out = scaler.transform(X.values)
    return StateMatrix(values=out, nodes=list(X.nodes)), scaler
