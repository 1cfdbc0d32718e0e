"""Data containers. A data matrix is a plain ``d x n`` array, columns are samples."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidShapeError


def as_data_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InvalidShapeError(f"data must be 2-d (d x n), got shape {X.shape}")
    return X


def center(X) -> np.ndarray:
    """Subtract the mean sample so that ``X 1 = 0``."""
    X = as_data_matrix(X)
    if X.shape[1] == 0:
        return X.copy()
    return X - X.mean(axis=1, keepdims=True)


def is_centered(X, tol: float = 1e-9) -> bool:
    X = as_data_matrix(X)
    n = X.shape[1]
    if n == 0:
        return True
    scale = np.max(np.abs(X), axis=1)
    return bool(np.all(np.abs(X.sum(axis=1)) <= tol * n * np.maximum(scale, 1.0)))


@dataclass(frozen=True)
class LabeledData:
    """Data matrix with one class label per column (at least two classes)."""

    X: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = as_data_matrix(self.X)
        labels = np.asarray(self.labels)
        if labels.shape != (X.shape[1],):
            raise InvalidShapeError("need exactly one label per sample")
        if len(np.unique(labels)) < 2:
            raise InvalidInputError("labeled data needs at least two classes")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)
