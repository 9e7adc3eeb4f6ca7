"""Linear readout y(k) = sum_i W_i X_i(k) + b, trained by ridge regression."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .reservoir import StateMatrix

__all__ = ["ReadoutModel", "train_ridge", "predict", "predict_labels"]

_FORMAT_VERSION = 1


def _as_array(X) -> np.ndarray:
    if isinstance(X, StateMatrix):
        return X.values
    return np.asarray(X, dtype=np.float64)


@dataclass
class ReadoutModel:
    """Trained readout: weight vector (or n x C matrix) plus bias.

    For scalar targets ``weights`` has shape (n,) and ``bias`` is a
    float; for C-class targets ``weights`` is (n, C) and ``bias`` (C,).
    """

    weights: np.ndarray
    bias: np.ndarray | float
    ridge_lambda: float

    @property
    def num_inputs(self) -> int:
        return self.weights.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "format_version": _FORMAT_VERSION,
                "ridge_lambda": self.ridge_lambda,
                "weights": np.asarray(self.weights).tolist(),
                "bias": np.asarray(self.bias).tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "ReadoutModel":
        data = json.loads(text)
        version = data.get("format_version")
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported readout format version {version!r}")
        weights = np.asarray(data["weights"], dtype=np.float64)
        bias = np.asarray(data["bias"], dtype=np.float64)
        if bias.ndim == 0:
            bias = float(bias)
        return cls(weights=weights, bias=bias, ridge_lambda=float(data["ridge_lambda"]))


def train_ridge(X, d, ridge_lambda: float = 1e-6) -> ReadoutModel:
    """Fit W, b minimising ||X W + b - d||^2 + lambda ||W||^2.

    The bias is carried by an appended constant-one column and excluded
    from the penalty.  ``d`` may be a vector or a (T, C) matrix of
    per-class targets.  With ``ridge_lambda == 0`` and rank-deficient
    states the minimum-norm solution is returned with a conditioning
    warning.
    """
    Xv = _as_array(X)
    dv = np.asarray(d, dtype=np.float64)
    if Xv.ndim != 2:
        raise ValueError("states must be a 2-D matrix")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be non-negative")
    scalar_target = dv.ndim == 1
    if dv.shape[0] != Xv.shape[0]:
        raise ValueError(
            f"target rows {dv.shape[0]} != state rows {Xv.shape[0]}"
        )

    T, n = Xv.shape
    Xa = np.hstack([Xv, np.ones((T, 1))])
    G = Xa.T @ Xa
    G[np.diag_indices(n)] += ridge_lambda  # bias (last diagonal) unpenalised
    rhs = Xa.T @ (dv if not scalar_target else dv[:, None])

    solved = None
    if ridge_lambda > 0 or n + 1 <= T:
        try:
            c, low = scipy.linalg.cho_factor(G)
            solved = scipy.linalg.cho_solve((c, low), rhs)
        except np.linalg.LinAlgError:
            solved = None
    if solved is None:
        warnings.warn(
            "normal equations not positive definite; using minimum-norm "
            "least-squares solution",
            RuntimeWarning,
            stacklevel=2,
        )
        solved = np.linalg.lstsq(Xa, dv if not scalar_target else dv[:, None],
                                 rcond=None)[0]
    else:
        # one step of iterative refinement keeps the normal-equation
        # residual below 1e-8 relative even for ill-conditioned states
        resid = rhs - G @ solved
        scale = np.linalg.norm(rhs)
        if scale > 0 and np.linalg.norm(resid) > 1e-10 * scale:
            c, low = scipy.linalg.cho_factor(G)
            solved = solved + scipy.linalg.cho_solve((c, low), resid)

    weights = solved[:-1]
    bias = solved[-1]
    if scalar_target:
        weights = weights[:, 0]
        bias = float(bias[0])
    return ReadoutModel(weights=weights, bias=bias, ridge_lambda=float(ridge_lambda))


def predict(model: ReadoutModel, X) -> np.ndarray:
    """Apply the readout: y(k) = X(k) . W + b (scores per class for C > 1)."""
    Xv = _as_array(X)
    if Xv.ndim != 2 or Xv.shape[1] != model.num_inputs:
        raise ValueError(
            f"state matrix with {Xv.shape[1] if Xv.ndim == 2 else '?'} columns "
            f"does not match model with {model.num_inputs} inputs"
        )
    return Xv @ model.weights + model.bias


def predict_labels(model: ReadoutModel, X) -> np.ndarray:
    """Classify by argmax over per-class scores."""
    scores = predict(model, X)
    if scores.ndim != 2:
        raise ValueError("label prediction requires a multi-column readout")
    return np.argmax(scores, axis=1)
