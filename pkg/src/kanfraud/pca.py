"""Two-component PCA on a cyclic Jacobi eigensolver."""
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_matrix
from .data import Standardizer
from .exceptions import DegenerateDataError, InsufficientDataError, InvalidParameterError
from .svg import scatter_svg

__all__ = [
    "PcaModel",
    "jacobi_eigh",
    "pca_fit",
    "pca_transform",
    "TwoComponentPCA",
    "projection_csv",
    "projection_svg",
]

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def jacobi_eigh(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every off-diagonal pair until the off-diagonal Frobenius
    norm falls below ``tol`` times the matrix norm. Returns eigenvalues in
    descending order and the matching eigenvectors as columns.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise InvalidParameterError("jacobi_eigh needs a symmetric square matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # theta**2 would overflow; first-order rotation is exact to rounding
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        warnings.warn("Jacobi eigensolver hit the sweep limit before converging", stacklevel=2)
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], v[:, order]


def _orient(vectors):
    """Flip each row so its largest-magnitude entry is positive."""
    vectors = vectors.copy()
    for row in vectors:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return vectors


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_ratio: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_features(self):
        return self.mean.shape[0]

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "explained_ratio": self.explained_ratio.tolist(),
        }


def pca_fit(data):
    """Top-two principal axes of mean-centred data (covariance with n - 1)."""
    X = check_matrix(data)
    n, d = X.shape
    if n < 3:
        raise InsufficientDataError(f"PCA needs at least 3 rows, got {n}")
    if d < 2:
        raise InvalidParameterError(f"PCA to two components needs at least 2 columns, got {d}")
    mean = X.mean(axis=0)
    centred = X - mean
    cov = centred.T @ centred / (n - 1)
    if not np.any(cov):
        raise DegenerateDataError("all columns are constant; covariance is zero")
    values, vectors = jacobi_eigh(cov)
    values = np.clip(values, 0.0, None)
    total = values.sum()
    components = _orient(vectors[:, :2].T)
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=values[:2],
        explained_ratio=values[:2] / total,
        eigenvalues=values,
    )


def pca_transform(model, data):
    X = check_matrix(data, n_features=model.n_features)
    return (X - model.mean) @ model.components.T


class TwoComponentPCA(TransformerMixin, BaseEstimator):
    """Projection onto two principal components.

    With ``standardize=True`` columns are z-scored first (zero-variance
    columns dropped), so large-unit features do not dominate the axes.
    """

    def __init__(self, standardize=True):
        self.standardize = standardize

    def fit(self, X, y=None):
        X = check_matrix(X)
        self.n_features_in_ = X.shape[1]
        if self.standardize:
            self.scaler_ = Standardizer().fit(X)
            X = self.scaler_.transform(X)
        else:
            self.scaler_ = None
        self.model_ = pca_fit(X)
        self.components_ = self.model_.components
        self.explained_variance_ = self.model_.explained_variance
        self.explained_variance_ratio_ = self.model_.explained_ratio
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        X = check_matrix(X, n_features=self.n_features_in_)
        if self.scaler_ is not None:
            X = self.scaler_.transform(X)
        return pca_transform(self.model_, X)


def projection_csv(points, labels):
    lines = ["pc1,pc2,label"]
    for (a, b), y in zip(np.asarray(points), np.asarray(labels)):
        lines.append(f"{float(a)!r},{float(b)!r},{int(y)}")
    return "\n".join(lines) + "\n"


def projection_svg(points, labels, model=None, title="PCA projection"):
    axes = ("PC1", "PC2")
    if model is not None:
        axes = tuple(f"PC{i + 1} ({100 * r:.1f}%)" for i, r in enumerate(model.explained_ratio))
    return scatter_svg(points, labels, title=title, axis_labels=axes)
