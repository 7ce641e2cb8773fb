"""Binary classification metrics and the logistic-regression comparison row.

Ratios whose denominator is zero are reported as ``None`` ("undefined")
instead of 0 or NaN, so a degenerate run can never look like a real score.
"""
import csv
import io
import json
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_matrix, check_probabilities
from .exceptions import DataError, InvalidParameterError
from .svg import confusion_svg

__all__ = [
    "ConfusionCounts",
    "MetricsReport",
    "compute_metrics",
    "render_report",
    "parse_text_report",
    "report_from_json",
    "TABLE_ROWS",
    "CSV_COLUMNS",
    "LogisticBaseline",
    "logistic_baseline",
    "confusion_csv",
    "confusion_heatmap",
]

LOGLOSS_EPS = 1e-15
UNDEFINED = "undefined (0/0)"

# (field, label) in metric-table order
TABLE_ROWS = [
    ("precision", "Precision"),
    ("recall", "Recall"),
    ("f1", "F1 Score"),
    ("accuracy", "Accuracy"),
    ("auc_roc", "AUC-ROC"),
    ("tpr", "True Positive Rate (Sensitivity)"),
    ("fpr", "False Positive Rate"),
    ("tnr", "True Negative Rate"),
    ("logloss", "Logarithmic Loss"),
]
HYPER_ROWS = ["Width", "K", "Grid"]
CSV_COLUMNS = [
    "Width", "K", "Grid", "Precision", "Recall", "F1 Score",
    "Accuracy", "AUC-ROC", "TPR", "FPR", "TNR", "LogLoss", "TP", "FP", "TN", "FN",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    auc_roc: float
    tpr: float
    fpr: float
    tnr: float
    logloss: float
    counts: ConfusionCounts

    def undefined_fields(self):
        return [f.name for f in fields(self) if f.name != "counts" and getattr(self, f.name) is None]

    def to_dict(self):
        d = asdict(self)
        d["undefined"] = self.undefined_fields()
        return d

    @classmethod
    def from_dict(cls, d):
        counts = ConfusionCounts(**{k: int(v) for k, v in d["counts"].items()})
        values = {name: d[name] for name, _ in TABLE_ROWS}
        return cls(**values, counts=counts)


def _ratio(num, den):
    return num / den if den else None


def _auc(scores, labels):
    """Mann-Whitney rank statistic; tied scores share average ranks (half credit)."""
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def compute_metrics(probs, labels, threshold=0.5):
    labels = check_binary_labels(labels)
    probs = check_probabilities(probs, labels.size)
    pred = probs >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    tn = int(np.sum(~pred & ~pos))
    fn = int(np.sum(~pred & pos))
    clipped = np.clip(probs, LOGLOSS_EPS, 1.0 - LOGLOSS_EPS)
    logloss = float(-np.mean(np.where(pos, np.log(clipped), np.log1p(-clipped))))
    fpr = _ratio(fp, fp + tn)
    return MetricsReport(
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        f1=_ratio(2 * tp, 2 * tp + fp + fn),
        accuracy=(tp + tn) / labels.size,
        auc_roc=_auc(probs, labels),
        tpr=_ratio(tp, tp + fn),
        fpr=fpr,
        tnr=_ratio(tn, tn + fp),
        logloss=max(logloss, 0.0),
        counts=ConfusionCounts(tp, fp, tn, fn),
    )


def format_width(width):
    return "{" + ", ".join(str(int(w)) for w in width) + "}"


def _fmt(value, digits):
    if value is None:
        return UNDEFINED
    return repr(float(value)) if digits is None else f"{value:.{digits}f}"


def _parse_value(text):
    text = text.strip()
    return None if text.startswith("undefined") else float(text)


def render_report(report, fmt="text", hyper=None, digits=None):
    """Render a report as ``text``, ``json`` or ``csv``.

    ``hyper`` is an optional ``(width, k, grid)`` triple prepended as the
    Width/K/Grid rows (columns in CSV). ``digits=None`` prints the shortest
    round-tripping representation of every float.
    """
    if fmt == "json":
        d = report.to_dict()
        if hyper is not None:
            d["hyper"] = {"width": list(hyper[0]), "k": int(hyper[1]), "grid": int(hyper[2])}
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerow(csv_row(report, hyper, digits))
        return buf.getvalue()
    if fmt != "text":
        raise InvalidParameterError(f"unknown report format {fmt!r}")
    rows = [("Metric", "Value")]
    if hyper is not None:
        rows += [("Width", format_width(hyper[0])), ("K", str(hyper[1])), ("Grid", str(hyper[2]))]
    rows += [(label, _fmt(getattr(report, name), digits)) for name, label in TABLE_ROWS]
    c = report.counts
    rows.append(("Confusion (TP FP TN FN)", f"{c.tp} {c.fp} {c.tn} {c.fn}"))
    pad = max(len(r[0]) for r in rows) + 2
    return "".join(f"{label:<{pad}}{value}\n" for label, value in rows)


def parse_text_report(text):
    """Inverse of ``render_report(..., "text")`` for the metric rows."""
    by_label = {label: name for name, label in TABLE_ROWS}
    values, counts = {}, None
    for line in text.splitlines():
        if line.startswith("Confusion (TP FP TN FN)"):
            tp, fp, tn, fn = (int(v) for v in line[len("Confusion (TP FP TN FN)"):].split())
            counts = ConfusionCounts(tp, fp, tn, fn)
            continue
        # labels contain single spaces only; the value follows a run of >= 2
        parts = line.split("  ", 1)
        if len(parts) == 2 and parts[0] in by_label:
            values[by_label[parts[0]]] = _parse_value(parts[1])
    missing = [name for name, _ in TABLE_ROWS if name not in values]
    if missing or counts is None:
        raise DataError(f"report text is missing rows: {missing or ['confusion']}")
    return MetricsReport(**values, counts=counts)


def report_from_json(text):
    return MetricsReport.from_dict(json.loads(text))


def csv_row(report, hyper=None, digits=None):
    width, k, grid = hyper if hyper is not None else ("", "", "")
    c = report.counts
    return [
        format_width(width) if hyper is not None else "",
        k,
        grid,
        *[("" if getattr(report, name) is None else _fmt(getattr(report, name), digits)) for name, _ in TABLE_ROWS],
        c.tp, c.fp, c.tn, c.fn,
    ]


def confusion_csv(counts):
    return f"actual\\predicted,0,1\n0,{counts.tn},{counts.fp}\n1,{counts.fn},{counts.tp}\n"


def confusion_heatmap(counts, title="Confusion matrix"):
    return confusion_svg(counts.tn, counts.fp, counts.fn, counts.tp, title=title)


class LogisticBaseline(ClassifierMixin, BaseEstimator):
    """L2-regularised logistic regression fitted by full-batch gradient descent."""

    def __init__(self, alpha=1e-3, learning_rate=0.5, max_iter=2000, random_state=0):
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_binary_labels(y, X.shape[0]).astype(np.float64)
        rng = np.random.default_rng(self.random_state)
        w = rng.normal(0.0, 0.01, size=X.shape[1])
        b = 0.0
        n = X.shape[0]
        for _ in range(self.max_iter):
            err = expit(X @ w + b) - y
            w -= self.learning_rate * (X.T @ err / n + self.alpha * w)
            b -= self.learning_rate * err.mean()
        self.coef_ = w
        self.intercept_ = b
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_matrix(X, n_features=self.n_features_in_)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)


def logistic_baseline(data, threshold=0.5, random_state=0):
    """Fit on the training split, report on the test split."""
    model = LogisticBaseline(random_state=random_state).fit(data.train.features, data.train.labels)
    return compute_metrics(model.predict_proba(data.test.features)[:, 1], data.test.labels, threshold)
