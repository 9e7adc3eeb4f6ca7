"""Error and memory metrics: NMSE, NMSE_var, r^2, C_STM, accuracy."""

from __future__ import annotations

import csv
import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MetricsReport",
    "UndefinedNormalizationError",
    "nmse",
    "nmse_var",
    "nmse_pointwise",
    "r_squared",
    "stm_capacity",
    "accuracy",
    "save_forgetting_curve",
]


class UndefinedNormalizationError(ValueError):
    """The metric's normaliser (target power or variance) vanishes."""


def _pair(d, y) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if d.shape != y.shape or d.ndim != 1 or d.size < 1:
        raise ValueError(f"series shapes {d.shape} and {y.shape} do not match")
    return d, y


def nmse(d, y) -> float:
    """sum((d - y)^2) / sum(d^2), the ratio-of-sums convention.

    The pointwise-ratio reading of the same formula is available as
    :func:`nmse_pointwise`; it is singular whenever d(k) ~ 0, which is
    why this convention is the default.
    """
    d, y = _pair(d, y)
    denom = float(np.sum(d * d))
    if denom <= 0.0:
        raise UndefinedNormalizationError("target power sum(d^2) is zero")
    return float(np.sum((d - y) ** 2)) / denom


def nmse_var(d, y) -> float:
    """sum((d - y)^2) / sum((d - mean(d))^2); exactly 1 for y = mean(d)."""
    d, y = _pair(d, y)
    centered = d - d.mean()
    denom = float(np.sum(centered * centered))
    if denom <= 0.0:
        raise UndefinedNormalizationError("target is constant; variance is zero")
    return float(np.sum((d - y) ** 2)) / denom


def nmse_pointwise(d, y) -> float:
    """mean over k of (d(k) - y(k))^2 / d(k)^2 (the sum-of-ratios reading)."""
    d, y = _pair(d, y)
    if np.any(d == 0.0):
        raise UndefinedNormalizationError("pointwise NMSE undefined where d(k) = 0")
    return float(np.mean(((d - y) / d) ** 2))


def r_squared(d, y) -> float:
    """Squared correlation Cov(d, y)^2 / (Var(d) * Var(y)), in [0, 1].

    A constant input makes the correlation undefined; that degenerate
    predictor scores 0 with a warning.
    """
    d, y = _pair(d, y)
    if d.size < 2:
        raise ValueError("r_squared needs at least two samples")
    dc = d - d.mean()
    yc = y - y.mean()
    vd = float(np.dot(dc, dc))
    vy = float(np.dot(yc, yc))
    if vd <= 0.0 or vy <= 0.0:
        warnings.warn(
            "zero variance in r_squared input; returning 0", RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    cov = float(np.dot(dc, yc))
    return min(1.0, cov * cov / (vd * vy))


def stm_capacity(curve) -> float:
    """Short-term memory capacity: the sum of r^2(tau) over the curve."""
    curve = np.asarray(curve, dtype=np.float64)
    if curve.ndim != 1:
        raise ValueError("forgetting curve must be one-dimensional")
    if np.any((curve < 0) | (curve > 1)):
        raise ValueError("r^2 values must lie in [0, 1]")
    return float(np.sum(curve))


def accuracy(predictions, truth) -> float:
    """Fraction of predicted labels equal to the true labels."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape or predictions.size < 1:
        raise ValueError(
            f"label shapes {predictions.shape} and {truth.shape} do not match"
        )
    return float(np.mean(predictions == truth))


def save_forgetting_curve(path, curve, c_stm: float | None = None) -> None:
    """Write (tau, r_squared) rows; appends a `c_stm` summary line."""
    curve = np.asarray(curve, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "r_squared"])
        for tau, r2 in enumerate(curve, start=1):
            writer.writerow([tau, repr(float(r2))])
        writer.writerow(["c_stm", repr(float(c_stm if c_stm is not None
                                              else stm_capacity(curve)))])


@dataclass
class MetricsReport:
    """All metrics for one experimental cell, keyed by its sweep coordinates."""

    kind: str = ""
    field: float = 0.0
    interval: float = 0.0
    detectors: str = ""
    interference: bool = False
    seed: int = 0
    nodes: int = 0
    nmse_train: float | None = None
    nmse_test: float | None = None
    nmse_var_train: float | None = None
    nmse_var_test: float | None = None
    accuracy: float | None = None
    c_stm: float | None = None
    forgetting_curve: np.ndarray | None = dataclasses.field(default=None,
                                                            repr=False)
    error: str = ""

    CSV_FIELDS = (
        "kind", "field", "interval", "detectors", "interference", "seed",
        "nodes", "nmse_train", "nmse_test", "nmse_var_train", "nmse_var_test",
        "accuracy", "c_stm", "error",
    )

    def csv_row(self) -> list[str]:
        row = []
        for name in self.CSV_FIELDS:
            value = getattr(self, name)
            if value is None:
                row.append("")
            elif isinstance(value, bool):
                row.append("1" if value else "0")
            elif isinstance(value, float):
                row.append(repr(value))
            else:
                row.append(str(value))
        return row
