"""Linear SVM trained by dual coordinate descent.

Primal objective (the bias is regularized through feature augmentation,
so the dual stays box-constrained):

    P(w, b) = 0.5 * (||w||^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b))

The dual is maximized coordinate-wise over alpha in [0, C]^n with seeded
random permutations per epoch; training stops when the relative duality
gap drops below ``tol`` (default 1e-6, well inside the documented 1e-3
solution tolerance). Deterministic for a fixed seed.

Multi-class problems train one-vs-rest; prediction takes the argmax of
the decision values, and exact ties go to the lexicographically smallest
label. Binary models keep a single weight vector whose positive side is
the larger label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import SCHEMA_VERSION
from ..errors import ParameterError, SchemaVersionError, SingleClassError
from ..seeding import derive_seed, derived_rng

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-6
MAX_EPOCHS = 4000


@dataclass
class LinearSvmModel:
    classes: list[str]
    weights: np.ndarray  # (n_vectors, d); binary -> 1 row
    bias: np.ndarray  # (n_vectors,)
    C: float

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray,
                  C: float) -> float:
    """Primal objective; ``y`` in {-1, +1}."""
    margins = 1.0 - y * (X @ w + b)
    return float(0.5 * (w @ w + b * b) + C * np.sum(np.maximum(0.0, margins)))


def _solve_binary(X: np.ndarray, y: np.ndarray, C: float, seed: int,
                  tol: float, max_epochs: int) -> tuple[np.ndarray, float]:
    n, d = X.shape
    rng = derived_rng(seed, "svm_dcd")
    q_diag = np.einsum("ij,ij->i", X, X) + 1.0  # augmented bias feature
    alpha = np.zeros(n)
    w = np.zeros(d)
    b = 0.0
    for _ in range(max_epochs):
        order = rng.permutation(n)
        for i in order:
            g = y[i] * (X[i] @ w + b) - 1.0
            if alpha[i] <= 0.0:
                pg = min(g, 0.0)
            elif alpha[i] >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            if abs(pg) > 1e-14:
                new = min(max(alpha[i] - g / q_diag[i], 0.0), C)
                step = new - alpha[i]
                if step != 0.0:
                    w += step * y[i] * X[i]
                    b += step * y[i]
                    alpha[i] = new
        primal = svm_objective(w, b, X, y, C)
        dual = float(alpha.sum() - 0.5 * (w @ w + b * b))
        if primal - dual <= tol * max(1.0, abs(primal)):
            break
    return w, b


def train_svm(features, C: float = DEFAULT_C, seed: int = 0,
              tol: float = DEFAULT_TOL,
              max_epochs: int = MAX_EPOCHS) -> LinearSvmModel:
    """Train on a FeatureMatrix or on (X, labels) packed as a tuple."""
    if isinstance(features, tuple):
        X, labels = features
    else:
        X, labels = features.values, features.labels
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    if C <= 0:
        raise ParameterError(f"C must be > 0, got {C}")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise SingleClassError(
            f"training data has a single class {classes}; need at least two"
        )
    index = {c: k for k, c in enumerate(classes)}
    y_idx = np.array([index[l] for l in labels])

    if len(classes) == 2:
        y = np.where(y_idx == 1, 1.0, -1.0)
        w, b = _solve_binary(X, y, C, seed, tol, max_epochs)
        weights = w[None, :]
        bias = np.array([b])
    else:
        rows, bias_list = [], []
        for k in range(len(classes)):
            y = np.where(y_idx == k, 1.0, -1.0)
            w, b = _solve_binary(X, y, C, derive_seed(seed, "ovr", k),
                                 tol, max_epochs)
            rows.append(w)
            bias_list.append(b)
        weights = np.stack(rows)
        bias = np.array(bias_list)
    return LinearSvmModel(classes=classes, weights=weights, bias=bias, C=C)


def decision_values(model: LinearSvmModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ParameterError(
            f"feature dimension {X.shape[1]} does not match model "
            f"({model.n_features})"
        )
    return X @ model.weights.T + model.bias


def predict(model: LinearSvmModel, X: np.ndarray) -> list[str]:
    scores = decision_values(model, X)
    if len(model.classes) == 2:
        # strictly positive -> larger label; ties (0) -> smaller label
        return [model.classes[1] if s > 0 else model.classes[0]
                for s in scores[:, 0]]
    # argmax returns the first maximum, i.e. the smallest label on ties
    return [model.classes[k] for k in np.argmax(scores, axis=1)]


def save_svm(model: LinearSvmModel, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "format": "readtask-linear-svm",
        "schema_version": SCHEMA_VERSION,
        "classes": model.classes,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "C": model.C,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def load_svm(path: str | Path) -> LinearSvmModel:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != "readtask-linear-svm":
        raise SchemaVersionError(f"{path}: not a readtask SVM file")
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path}: schema_version {payload.get('schema_version')} "
            f"unsupported (expected {SCHEMA_VERSION})"
        )
    return LinearSvmModel(
        classes=list(payload["classes"]),
        weights=np.asarray(payload["weights"], dtype=float),
        bias=np.asarray(payload["bias"], dtype=float),
        C=float(payload["C"]),
    )
