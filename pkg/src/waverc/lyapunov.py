"""Lyapunov-spectrum estimation from a scalar trace.

Pipeline: delay-embed the series, estimate a local Jacobian at each
orbit point from the evolution of its epsilon-neighbourhood (least
squares over all neighbours), and accumulate the spectrum by QR
re-orthonormalisation along the orbit.  Exponents are reported per
sample step unless ``sample_dt`` rescales them.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "EmbeddingSpec",
    "LyapunovResult",
    "JacobianEstimate",
    "UnreliableEstimateError",
    "embed",
    "estimate_jacobian",
    "lyapunov_spectrum",
    "qr_treadmill",
    "phase_portrait",
    "save_convergence_csv",
    "save_phase_portrait_csv",
]

_WIDENING_FACTOR = 1.5
_MAX_WIDENINGS = 3
_SINGULAR_RIDGE = 1e-10
_MAX_SKIP_FRACTION = 0.5


class UnreliableEstimateError(RuntimeError):
    """Raised when too many orbit points had to be skipped."""


@dataclass(frozen=True)
class EmbeddingSpec:
    """Delay-embedding and neighbourhood parameters.

    ``epsilon`` is a fraction of the series span.  ``min_neighbors``
    defaults to 2*dimension + 1; a point whose neighbourhood stays
    smaller after widening epsilon by 1.5x up to three times is skipped.
    ``max_neighbors`` caps the least-squares system per point (the
    nearest neighbours are kept), and ``max_iterations`` caps the length
    of the QR pass.
    """

    dimension: int = 1
    lag: int = 1
    epsilon: float = 0.02
    evolution_steps: int = 1
    min_neighbors: int | None = None
    max_neighbors: int = 40
    max_iterations: int | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("embedding dimension must be at least 1")
        if self.lag < 1:
            raise ValueError("lag must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be a fraction of the span in (0, 1)")
        if self.evolution_steps < 1:
            raise ValueError("evolution_steps must be at least 1")
        if self.min_neighbors is not None and self.min_neighbors < self.dimension + 1:
            raise ValueError("min_neighbors must be at least dimension + 1")
        if self.max_neighbors < self.effective_min_neighbors:
            raise ValueError("max_neighbors must be >= min_neighbors")

    @property
    def effective_min_neighbors(self) -> int:
        if self.min_neighbors is not None:
            return self.min_neighbors
        return 2 * self.dimension + 1

    def required_length(self) -> int:
        return ((self.dimension - 1) * self.lag + self.evolution_steps
                + self.effective_min_neighbors + 1)


@dataclass
class JacobianEstimate:
    """One local Jacobian with its fit diagnostics."""

    jacobian: np.ndarray
    residual: float
    n_neighbors: int
    radius: float


@dataclass
class LyapunovResult:
    """Estimated spectrum plus estimator diagnostics.

    ``exponents`` are sorted descending.  ``convergence`` holds the
    running partial means, one row per processed orbit point, columns
    ordered like ``exponents``.  ``neighbor_counts`` summarises the
    neighbourhood sizes actually used.
    """

    exponents: np.ndarray
    convergence: np.ndarray
    neighbor_counts: dict
    skipped_fraction: float
    points_used: int


def embed(series, spec: EmbeddingSpec) -> np.ndarray:
    """Delay embedding v(t) = (x(t), x(t+lag), ..., x(t+(m-1) lag))."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    m, lag = spec.dimension, spec.lag
    n_vectors = series.size - (m - 1) * lag
    if n_vectors < 1:
        raise ValueError(
            f"series of length {series.size} too short; need at least "
            f"{(m - 1) * lag + 1} samples for this embedding"
        )
    cols = [series[j * lag: j * lag + n_vectors] for j in range(m)]
    return np.stack(cols, axis=1)


def _series_span(points: np.ndarray) -> float:
    return float(points.max() - points.min())


def _fit_jacobian(mu: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares J minimising sum ||z_i - J mu_i||^2.

    Solves J = Z M^T (M M^T)^-1 in row convention; a singular normal
    matrix is ridged by 1e-10 I with a warning.
    """
    G = mu.T @ mu
    rhs = mu.T @ z
    try:
        sol = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        warnings.warn(
            "singular neighbourhood matrix; adding 1e-10 ridge", RuntimeWarning,
            stacklevel=2,
        )
        sol = np.linalg.solve(G + _SINGULAR_RIDGE * np.eye(G.shape[0]), rhs)
    J = sol.T
    residual = float(np.sqrt(np.mean((z - mu @ J.T) ** 2)))
    return J, residual


def _neighbors_of(tree: cKDTree, points: np.ndarray, t: int, radius: float,
                  last_usable: int, spec: EmbeddingSpec) -> tuple[np.ndarray, float]:
    """Indices of usable neighbours of v(t), widening the radius as allowed."""
    want = spec.max_neighbors + (points.shape[0] - 1 - last_usable) + 1
    want = min(want, points.shape[0])
    r = radius
    for _ in range(_MAX_WIDENINGS + 1):
        dist, idx = tree.query(points[t], k=want, distance_upper_bound=r)
        # exact duplicates (dist == 0) have mu = 0 and carry no Jacobian
        # information, so they do not count as neighbours
        valid = idx[np.isfinite(dist) & (dist > 0) & (idx <= last_usable)]
        if valid.size >= spec.effective_min_neighbors:
            return valid[: spec.max_neighbors], r
        r *= _WIDENING_FACTOR
    return valid[: spec.max_neighbors], r / _WIDENING_FACTOR


def estimate_jacobian(points: np.ndarray, t: int, spec: EmbeddingSpec,
                      _tree: cKDTree | None = None,
                      _radius: float | None = None) -> JacobianEstimate | None:
    """Local Jacobian J(t) from the epsilon-neighbourhood of v(t).

    Neighbours v(k) with ||v(k) - v(t)|| < eps are matched to their
    images s steps later and J solves the resulting least-squares
    problem.  Returns None (the skip-point signal) when fewer than
    ``min_neighbors`` usable neighbours exist even after widening.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != spec.dimension:
        raise ValueError(
            f"points must have shape (n, {spec.dimension}), got {points.shape}"
        )
    s = spec.evolution_steps
    last_usable = points.shape[0] - 1 - s
    if not 0 <= t <= last_usable:
        raise ValueError(f"t={t} cannot evolve {s} steps in {points.shape[0]} points")
    tree = _tree if _tree is not None else cKDTree(points)
    radius = _radius if _radius is not None else spec.epsilon * _series_span(points)
    nb, used_radius = _neighbors_of(tree, points, t, radius, last_usable, spec)
    if nb.size < spec.effective_min_neighbors:
        return None
    mu = points[nb] - points[t]
    z = points[nb + s] - points[t + s]
    J, residual = _fit_jacobian(mu, z)
    return JacobianEstimate(jacobian=J, residual=residual,
                            n_neighbors=int(nb.size), radius=used_radius)


def qr_treadmill(jacobians) -> np.ndarray:
    """Accumulate log |R_ii| along a sequence of Jacobians.

    Implements J(t) Q_t = Q_{t+1} R_{t+1} with Q_0 = I and the diagonal
    of R forced positive; returns the (T, m) array of log diagonals.
    """
    logs = []
    Q = None
    for J in jacobians:
        J = np.asarray(J, dtype=np.float64)
        if Q is None:
            Q = np.eye(J.shape[0])
        Q, R = np.linalg.qr(J @ Q)
        signs = np.sign(np.diag(R))
        signs[signs == 0] = 1.0
        Q = Q * signs
        diag = np.abs(np.diag(R))
        logs.append(np.log(np.maximum(diag, 1e-300)))
    if not logs:
        raise ValueError("no Jacobians supplied")
    return np.asarray(logs)


def lyapunov_spectrum(series, spec: EmbeddingSpec,
                      sample_dt: float = 1.0) -> LyapunovResult:
    """Estimate the Lyapunov spectrum of a scalar time series.

    The treadmill walks the orbit in strides of ``evolution_steps``,
    estimating a Jacobian at each visited point; exponents are
    lambda_i = sum_t log |R_t^ii| / (T * s * sample_dt), sorted
    descending.  A positive leading exponent marks disorderly (chaotic)
    dynamics, a negative one orderly dynamics.  More than half the
    points skipped raises :class:`UnreliableEstimateError`.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.size < spec.required_length():
        raise ValueError(
            f"series of length {series.size} too short; spectrum estimation "
            f"needs at least {spec.required_length()} samples"
        )
    points = embed(series, spec)
    s = spec.evolution_steps
    last_usable = points.shape[0] - 1 - s
    radius = spec.epsilon * _series_span(points)
    tree = cKDTree(points)

    ts = np.arange(0, last_usable + 1, s)
    if spec.max_iterations is not None:
        ts = ts[: spec.max_iterations]

    m = spec.dimension
    Q = np.eye(m)
    sums = np.zeros(m)
    count = 0
    skipped = 0
    nb_counts = []
    convergence = np.empty((ts.size, m))

    for t in ts:
        est = estimate_jacobian(points, int(t), spec, _tree=tree, _radius=radius)
        if est is None:
            skipped += 1
            continue
        nb_counts.append(est.n_neighbors)
        if m == 1:
            sums[0] += np.log(max(abs(float(est.jacobian[0, 0])), 1e-300))
        else:
            Q, R = np.linalg.qr(est.jacobian @ Q)
            signs = np.sign(np.diag(R))
            signs[signs == 0] = 1.0
            Q = Q * signs
            sums += np.log(np.maximum(np.abs(np.diag(R)), 1e-300))
        count += 1
        convergence[count - 1] = sums / (count * s * sample_dt)

    total = count + skipped
    if total == 0 or count == 0:
        raise UnreliableEstimateError("no usable orbit points")
    skipped_fraction = skipped / total
    if skipped_fraction > _MAX_SKIP_FRACTION:
        raise UnreliableEstimateError(
            f"{skipped} of {total} orbit points skipped "
            f"({skipped_fraction:.0%}); raise epsilon or supply more data"
        )

    exponents = sums / (count * s * sample_dt)
    order = np.argsort(exponents)[::-1]
    convergence = convergence[:count][:, order]
    counts = np.asarray(nb_counts)
    return LyapunovResult(
        exponents=exponents[order],
        convergence=convergence,
        neighbor_counts={
            "min": int(counts.min()),
            "max": int(counts.max()),
            "mean": float(counts.mean()),
            "skipped": skipped,
        },
        skipped_fraction=skipped_fraction,
        points_used=count,
    )


def phase_portrait(series, lag: int) -> np.ndarray:
    """Ordered (x(t), x(t+lag)) pairs for plotting."""
    series = np.asarray(series, dtype=np.float64)
    if lag < 1:
        raise ValueError("lag must be at least 1")
    if series.size < lag + 1:
        raise ValueError(f"series of length {series.size} too short for lag {lag}")
    return np.stack([series[:-lag], series[lag:]], axis=1)


def save_convergence_csv(path, result: LyapunovResult) -> None:
    """Write the running-mean exponent trace, one row per orbit point."""
    m = result.convergence.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration"] + [f"lambda_{i + 1}" for i in range(m)])
        for i, row in enumerate(result.convergence):
            writer.writerow([i + 1] + [repr(float(v)) for v in row])


def save_phase_portrait_csv(path, pairs: np.ndarray) -> None:
    """Write (x, x_lagged) pairs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "x_lagged"])
        for a, b in np.asarray(pairs):
            writer.writerow([repr(float(a)), repr(float(b))])
