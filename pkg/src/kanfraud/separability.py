"""Quick screen: is the 2-D PCA projection separable by a spline boundary?

For every interval count and both axis orientations a cubic spline
boundary ``dep = b(ind)`` is fitted on 70% of the points and scored by
balanced accuracy on the remaining 30%. The data are deemed suitable for a
KAN when the best held-out score reaches the threshold.
"""
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_matrix
from .data import Dataset, standardize_apply, standardize_fit
from .exceptions import InsufficientDataError, InvalidParameterError, SingleClassError
from .pca import pca_fit, pca_transform, projection_csv, projection_svg
from .spline import basis_matrix, make_knots

__all__ = [
    "SeparabilityReport",
    "QuickDecision",
    "assess_separability",
    "quick_decision",
    "holdout_indices",
    "SplineSeparabilityAssessor",
    "DEFAULT_GRIDS",
    "DEFAULT_THRESHOLD",
]

DEFAULT_GRIDS = (3, 5, 8, 12, 20, 30)
DEFAULT_THRESHOLD = 0.9
FIT_FRACTION = 0.7
BOUNDARY_DEGREE = 3
BOUNDARY_STEPS = 500
BOUNDARY_LR = 0.05
MIN_POINTS = 20

# dependent axis as a function of the independent one; columns are 0-based
ORIENTATIONS = {
    "axis1_of_axis2": (0, 1),
    "axis2_of_axis1": (1, 0),
}


@dataclass
class SeparabilityReport:
    best_score: float
    best_grid: int
    best_orientation: str
    threshold: float
    suitable: bool
    per_grid_scores: list = field(default_factory=list)

    def verdict(self):
        head = "KAN recommended" if self.suitable else "KAN not recommended"
        return (
            f"{head}: best held-out balanced accuracy {self.best_score:.4f} "
            f"(grid {self.best_grid}, {self.best_orientation}; threshold {self.threshold})"
        )

    def to_dict(self):
        d = asdict(self)
        d["per_grid_scores"] = [
            {"grid": g, "orientation": o, "score": s} for g, o, s in self.per_grid_scores
        ]
        d["verdict"] = self.verdict()
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def holdout_indices(labels, fit_fraction=FIT_FRACTION, seed=0):
    """Stratified (fit, held-out) index arrays, each sorted."""
    rng = np.random.default_rng(seed)
    fit, hold = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        cut = int(round(fit_fraction * idx.size))
        fit.append(idx[:cut])
        hold.append(idx[cut:])
    return np.sort(np.concatenate(fit)), np.sort(np.concatenate(hold))


def _balanced_accuracy(labels, pred):
    pos = labels == 1
    tpr = np.mean(pred[pos] == 1) if pos.any() else 0.0
    tnr = np.mean(pred[~pos] == 0) if (~pos).any() else 0.0
    return 0.5 * (tpr + tnr)


def _fit_boundary(ind, dep, labels, grid, steps, lr):
    """Fit score = a * dep_std - b(ind) by Adam on the mean logistic loss.

    The decision boundary is ``dep = mean + std * b(ind) / a``; ``a`` carries
    both the orientation sign and the steepness. Returns a scoring function.
    """
    lo, hi = float(ind.min()), float(ind.max())
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    kv = make_knots(lo, hi, grid, BOUNDARY_DEGREE)
    mu, sd = dep.mean(), dep.std()
    sd = sd if sd > 0 else 1.0
    B = basis_matrix(kv, ind)
    z = (dep - mu) / sd
    y = labels.astype(np.float64)
    theta = np.zeros(kv.n_basis + 1)  # [a, c...]
    design = np.column_stack([z, -B])
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    n = y.size
    for step in range(1, steps + 1):
        grad = design.T @ (expit(design @ theta) - y) / n
        m = 0.9 * m + 0.1 * grad
        v = 0.999 * v + 0.001 * grad * grad
        theta -= lr * (m / (1 - 0.9**step)) / (np.sqrt(v / (1 - 0.999**step)) + 1e-8)
    a, c = theta[0], theta[1:]

    def score(ind_new, dep_new):
        return a * (dep_new - mu) / sd - basis_matrix(kv, ind_new) @ c

    return score


def _evaluate(points, labels, fit_idx, hold_idx, grid, orientation, steps, lr):
    dep_col, ind_col = ORIENTATIONS[orientation]
    score = _fit_boundary(
        points[fit_idx, ind_col], points[fit_idx, dep_col], labels[fit_idx], grid, steps, lr
    )
    held = score(points[hold_idx, ind_col], points[hold_idx, dep_col])
    return grid, orientation, float(_balanced_accuracy(labels[hold_idx], (held > 0).astype(int)))


def assess_separability(
    points2d,
    labels,
    grids=DEFAULT_GRIDS,
    threshold=DEFAULT_THRESHOLD,
    seed=0,
    n_jobs=1,
    steps=BOUNDARY_STEPS,
    learning_rate=BOUNDARY_LR,
):
    points = check_matrix(points2d, n_features=2, name="points2d")
    labels = check_binary_labels(labels, points.shape[0])
    if points.shape[0] < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} points, got {points.shape[0]}")
    if labels.min() == labels.max():
        raise SingleClassError("separability needs both classes")
    grids = [int(g) for g in grids]
    if not grids or min(grids) < 1:
        raise InvalidParameterError(f"grids must be a non-empty list of positive integers, got {grids}")
    fit_idx, hold_idx = holdout_indices(labels, FIT_FRACTION, seed)
    tasks = sorted({(g, o) for g in grids for o in ORIENTATIONS})
    scores = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate)(points, labels, fit_idx, hold_idx, g, o, steps, learning_rate)
        for g, o in tasks
    )
    best = max(scores, key=lambda s: s[2])  # first maximum in (grid, orientation) order
    return SeparabilityReport(
        best_score=best[2],
        best_grid=best[0],
        best_orientation=best[1],
        threshold=float(threshold),
        suitable=bool(best[2] >= threshold),
        per_grid_scores=scores,
    )


@dataclass
class QuickDecision:
    report: SeparabilityReport
    pca: object
    scaler: object
    points: np.ndarray
    labels: np.ndarray

    def scatter_svg(self, title="PCA projection"):
        return projection_svg(self.points, self.labels, self.pca, title=title)

    def projection_csv(self):
        return projection_csv(self.points, self.labels)


def quick_decision(raw, grids=DEFAULT_GRIDS, threshold=DEFAULT_THRESHOLD, seed=0, n_jobs=1):
    """Standardise, project to two principal components and assess.

    Scaler and PCA are fitted on the boundary-fit rows only; the held-out
    rows used for scoring are merely transformed.
    """
    if not isinstance(raw, Dataset):
        raise InvalidParameterError("quick_decision expects an encoded Dataset")
    if raw.labels.min() == raw.labels.max():
        raise SingleClassError("quick decision needs both classes")
    fit_idx, _ = holdout_indices(raw.labels, FIT_FRACTION, seed)
    scaler, fit_rows = standardize_fit(raw.take(fit_idx))
    model = pca_fit(fit_rows.features)
    points = pca_transform(model, standardize_apply(scaler, raw).features)
    report = assess_separability(points, raw.labels, grids, threshold, seed, n_jobs)
    return QuickDecision(report, model, scaler, points, raw.labels)


class SplineSeparabilityAssessor(BaseEstimator):
    """Estimator form of :func:`quick_decision`.

    After ``fit(X, y)``: ``report_``, ``suitable_``, ``pca_`` and
    ``points_`` (the 2-D projection of ``X``).
    """

    def __init__(self, grids=DEFAULT_GRIDS, threshold=DEFAULT_THRESHOLD, random_state=0, n_jobs=1):
        self.grids = grids
        self.threshold = threshold
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_binary_labels(y, X.shape[0])
        result = quick_decision(Dataset(X, y), self.grids, self.threshold, self.random_state, self.n_jobs)
        self.report_ = result.report
        self.suitable_ = result.report.suitable
        self.pca_ = result.pca
        self.points_ = result.points
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "report_")
        return self.report_.best_score
