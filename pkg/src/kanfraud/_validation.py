"""Input validation helpers shared by the estimators and functional API."""
import numpy as np

from .exceptions import (
    DataError,
    DimensionMismatchError,
    EmptyDatasetError,
    LengthMismatchError,
    NonFiniteInputError,
    SingleClassError,
)


def check_matrix(X, n_features=None, name="X"):
    """Return ``X`` as a finite 2-D float64 array, optionally of fixed width."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got {X.ndim}-D")
    if X.shape[0] == 0:
        raise EmptyDatasetError(f"{name} has no rows")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInputError(f"{name} contains NaN or infinity")
    if n_features is not None and X.shape[1] != n_features:
        raise DimensionMismatchError(
            f"{name} has {X.shape[1]} features, expected {n_features}"
        )
    return X


def check_binary_labels(y, n_rows=None, require_both=False):
    y = np.asarray(y)
    if y.ndim != 1:
        y = y.ravel()
    if n_rows is not None and y.shape[0] != n_rows:
        raise LengthMismatchError(f"got {y.shape[0]} labels for {n_rows} rows")
    values = np.unique(y)
    if not np.all(np.isin(values, (0, 1))):
        raise DataError(f"labels must be 0/1, found {values[:5].tolist()}")
    y = y.astype(np.int64)
    if require_both and values.size < 2:
        raise SingleClassError("both classes must be present")
    return y


def check_probabilities(p, n_rows=None):
    p = np.asarray(p, dtype=np.float64).ravel()
    if n_rows is not None and p.shape[0] != n_rows:
        raise LengthMismatchError(f"got {p.shape[0]} scores for {n_rows} labels")
    if p.shape[0] == 0:
        raise EmptyDatasetError("no scores")
    if not np.all(np.isfinite(p)):
        raise NonFiniteInputError("scores contain NaN or infinity")
    return p
