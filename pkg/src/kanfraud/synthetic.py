"""Seeded synthetic datasets with known class structure.

Used as fixtures: the decision rule and the KAN should both succeed on
``make_spline_boundary`` and fail on its label-shuffled twin.
"""
import csv

import numpy as np
from scipy.stats import ortho_group

from .data import Dataset
from .spline import SplineFunction, make_knots, spline_eval

# bumpy reference boundary in latent (unit-variance) coordinates
_BOUNDARY_KNOTS = make_knots(-2.5, 2.5, 8, 3)
_BOUNDARY_COEFFS = np.array([0.0, 2.025, -2.025, 2.25, -2.25, 2.25, -2.025, 2.025, -1.35, 0.0, 0.0])


def reference_boundary():
    return SplineFunction(_BOUNDARY_KNOTS, _BOUNDARY_COEFFS)


def _names(d):
    return [f"f{i:02d}" for i in range(d)]


def make_blobs(n=400, dim=2, separation=8.0, seed=0):
    """Two isotropic unit-variance Gaussian blobs whose centres are
    ``separation`` apart along a random direction."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    y = np.repeat([0, 1], [n - n // 2, n // 2])
    X = rng.normal(size=(n, dim)) + np.outer(y - 0.5, direction) * separation
    order = rng.permutation(n)
    return Dataset(X[order], y[order], _names(dim))


def make_spline_boundary(n=1000, dim=30, seed=0, noise=0.05, rotation_seed=12345):
    """Labels ``x2 > s(x1)`` for the bumpy reference spline ``s``.

    The two latent coordinates (scaled to std 3 and 2 so PCA recovers them
    in order) plus ``dim - 2`` low-variance noise coordinates are mixed by a
    fixed random rotation, so no single raw column carries the signal.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n, 2))
    y = (u[:, 1] > spline_eval(reference_boundary(), u[:, 0])).astype(np.int64)
    Z = np.hstack([u * np.array([3.0, 2.0]), noise * rng.normal(size=(n, dim - 2))])
    if dim > 2:
        R = ortho_group.rvs(dim, random_state=rotation_seed)
        Z = Z @ R.T
    return Dataset(Z, y, _names(dim))


def make_null(n=1000, dim=30, seed=0):
    """Features and labels drawn independently."""
    rng = np.random.default_rng(seed)
    return Dataset(rng.normal(size=(n, dim)), rng.integers(0, 2, size=n), _names(dim))


def shuffled_labels(data, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(data.features, rng.permutation(data.labels), data.column_names, data.label_name)


def write_csv(data, path, label_column="Class"):
    """Write a :class:`Dataset` as a headed CSV with the label last."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(data.column_names) + [label_column])
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
