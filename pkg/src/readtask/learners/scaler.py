"""Feature scaling to [-1, 1] from training-data column ranges.

Test data reuses the training min/max and may land outside [-1, 1];
constant training columns map to 0 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True)
class ScalerParams:
    col_min: np.ndarray
    col_max: np.ndarray


def fit_scaler(train: np.ndarray) -> ScalerParams:
    x = np.asarray(train, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ParameterError("fit_scaler needs a nonempty 2-D array")
    return ScalerParams(col_min=x.min(axis=0), col_max=x.max(axis=0))


def apply_scaler(params: ScalerParams, matrix: np.ndarray) -> np.ndarray:
    x = np.asarray(matrix, dtype=float)
    span = params.col_max - params.col_min
    safe = np.where(span > 0, span, 1.0)
    scaled = -1.0 + 2.0 * (x - params.col_min) / safe
    return np.where(span > 0, scaled, 0.0)


def fit_sequence_scaler(sequences: list[np.ndarray]) -> ScalerParams:
    """Fit on all timesteps of all sequences (they are all valid words;
    padding is added later, after scaling)."""
    if not sequences:
        raise ParameterError("fit_sequence_scaler needs at least one sequence")
    return fit_scaler(np.concatenate(sequences, axis=0))


def apply_sequence_scaler(params: ScalerParams,
                          sequences: list[np.ndarray]) -> list[np.ndarray]:
    return [apply_scaler(params, s) for s in sequences]
