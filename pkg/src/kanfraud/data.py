"""CSV ingestion, numeric encoding, class balancing, scaling and splitting."""
import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_matrix
from .exceptions import (
    AllMissingColumnError,
    ClassTooSmallError,
    DataError,
    InvalidParameterError,
    MissingColumnError,
    MissingFileError,
    NonFiniteInputError,
    SingleClassError,
    UnparseableRowError,
)

__all__ = [
    "Dataset",
    "RawDataset",
    "SplitDataset",
    "BalanceReport",
    "Standardizer",
    "load_csv",
    "encode_numeric",
    "balance",
    "standardize_fit",
    "standardize_apply",
    "split",
    "largest_remainder",
]

MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none", "?"})
ONE_HOT_MAX = 32
DEFAULT_FRACTIONS = (0.7, 0.1, 0.2)


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    column_names: list = None
    label_name: str = "label"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got {self.features.ndim}-D")
        if not np.all(np.isfinite(self.features)):
            raise NonFiniteInputError("features contain NaN or infinity")
        self.labels = check_binary_labels(self.labels, self.features.shape[0])
        if self.column_names is None:
            self.column_names = [f"x{i}" for i in range(self.n_features)]
        self.column_names = list(self.column_names)
        if len(self.column_names) != self.n_features:
            raise DataError(f"{len(self.column_names)} names for {self.n_features} columns")

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1] if self.features.ndim == 2 else 0

    def class_counts(self):
        """``(fraud, nonfraud)``"""
        pos = int(self.labels.sum())
        return pos, self.n_rows - pos

    def take(self, idx):
        return Dataset(self.features[idx], self.labels[idx], self.column_names, self.label_name)


@dataclass
class RawDataset:
    """Parsed CSV before encoding: string cells plus binary labels."""

    frame: pd.DataFrame
    labels: np.ndarray
    label_name: str
    column_names: list = field(init=False)

    def __post_init__(self):
        self.column_names = list(self.frame.columns)


@dataclass
class SplitDataset:
    train: Dataset
    valid: Dataset
    test: Dataset
    split_seed: int
    fractions: tuple


@dataclass
class BalanceReport:
    original_counts: tuple
    kept_counts: tuple
    rule_applied: str

    def to_dict(self):
        return {
            "original_counts": {"fraud": self.original_counts[0], "nonfraud": self.original_counts[1]},
            "kept_counts": {"fraud": self.kept_counts[0], "nonfraud": self.kept_counts[1]},
            "rule_applied": self.rule_applied,
        }


def load_csv(path, label_column, positive_label="1"):
    """Read a headed, comma-separated UTF-8 file.

    Rows whose field count differs from the header raise
    :class:`UnparseableRowError` naming the 1-based file line.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise MissingFileError(f"no such file: {path}") from None
    except OSError as exc:
        raise MissingFileError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise UnparseableRowError(1, "file is empty, expected a header row") from None
        except csv.Error as exc:
            raise UnparseableRowError(1, str(exc)) from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingColumnError(f"label column {label_column!r} not in header {header}")
        rows = []
        try:
            for row in reader:
                if not row:
                    continue
                if len(row) != len(header):
                    raise UnparseableRowError(
                        reader.line_num, f"expected {len(header)} fields, found {len(row)}"
                    )
                rows.append(row)
        except csv.Error as exc:
            raise UnparseableRowError(reader.line_num, str(exc)) from None
    frame = pd.DataFrame(rows, columns=header, dtype=object)
    raw_labels = frame.pop(label_column).str.strip()
    labels = np.array([_label_matches(v, str(positive_label)) for v in raw_labels], dtype=np.int64)
    return RawDataset(frame.reset_index(drop=True), labels, label_column)


def _label_matches(value, positive):
    if value == positive.strip():
        return 1
    try:
        return int(float(value) == float(positive))
    except ValueError:
        return 0


def _as_numeric(col):
    """Float array with NaN for missing cells, or None if any cell is non-numeric."""
    out = np.empty(len(col), dtype=np.float64)
    for i, v in enumerate(col):
        if v is None or (isinstance(v, float) and np.isnan(v)):
            out[i] = np.nan
            continue
        s = str(v).strip()
        if s.lower() in MISSING_TOKENS:
            out[i] = np.nan
            continue
        try:
            out[i] = float(s)
        except ValueError:
            return None
        if not np.isfinite(out[i]):
            return None
    return out


def encode_numeric(raw):
    """Turn every column into finite floats.

    Numeric columns keep their position; missing cells get the column median
    plus a ``<col>__missing`` indicator. Text columns with at most 32
    distinct values become ``<col>=<value>`` indicators, wider ones a single
    ``<col>__freq`` relative-frequency column. Generated columns follow the
    kept numeric columns in alphabetical order. Already-numeric datasets pass
    through unchanged.
    """
    if isinstance(raw, Dataset):
        return Dataset(raw.features.copy(), raw.labels.copy(), raw.column_names, raw.label_name)
    kept, kept_names, generated = [], [], {}
    for name in raw.frame.columns:
        col = raw.frame[name].tolist()
        values = _as_numeric(col)
        if values is not None:
            missing = np.isnan(values)
            if missing.all():
                raise AllMissingColumnError(f"column {name!r} has no values")
            if missing.any():
                values = np.where(missing, np.median(values[~missing]), values)
                generated[f"{name}__missing"] = missing.astype(np.float64)
            kept.append(values)
            kept_names.append(name)
            continue
        cells = ["" if v is None else str(v).strip() for v in col]
        cells = ["" if c.lower() in MISSING_TOKENS else c for c in cells]
        if all(c == "" for c in cells):
            raise AllMissingColumnError(f"column {name!r} has no values")
        levels = sorted(set(cells))
        if len(levels) <= ONE_HOT_MAX:
            arr = np.array(cells, dtype=object)
            for level in levels:
                tag = level if level else "<missing>"
                generated[f"{name}={tag}"] = (arr == level).astype(np.float64)
        else:
            counts = pd.Series(cells).value_counts()
            generated[f"{name}__freq"] = np.array([counts[c] for c in cells], dtype=np.float64) / len(cells)
    names = kept_names + sorted(generated)
    columns = kept + [generated[n] for n in sorted(generated)]
    features = np.column_stack(columns) if columns else np.empty((len(raw.labels), 0))
    return Dataset(features, raw.labels, names, raw.label_name)


def balance(data, cap=7500, seed=0):
    """Equal-class subsample.

    With at least ``cap`` rows in both classes, ``cap`` of each are kept;
    otherwise every row of the minority class is kept and the majority class
    is sampled down to match. Kept rows stay in their original order.
    """
    if cap < 1:
        raise InvalidParameterError("cap must be >= 1")
    fraud, nonfraud = data.class_counts()
    if fraud == 0 or nonfraud == 0:
        raise SingleClassError(f"balancing needs both classes, got fraud={fraud} nonfraud={nonfraud}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(data.n_rows)
    shuffled = data.labels[order]
    n_keep = min(cap, fraud, nonfraud)
    rule = f"cap-{cap}" if min(fraud, nonfraud) >= cap else "match-minority"
    keep = np.concatenate([order[shuffled == 1][:n_keep], order[shuffled == 0][:n_keep]])
    keep.sort()
    report = BalanceReport((fraud, nonfraud), (n_keep, n_keep), rule)
    return data.take(keep), report


class Standardizer(TransformerMixin, BaseEstimator):
    """Per-column z-scoring that drops zero-variance columns.

    Statistics come from ``fit`` only; ``transform`` always applies them, so
    scaling a test split never looks at test statistics.
    """

    def __init__(self, column_names=None):
        self.column_names = column_names

    def fit(self, X, y=None):
        X = check_matrix(X)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        keep = scale > 0.0
        names = self.column_names or [f"x{i}" for i in range(X.shape[1])]
        self.dropped_ = [n for n, k in zip(names, keep) if not k]
        if self.dropped_:
            warnings.warn(f"dropping zero-variance columns: {self.dropped_}", stacklevel=2)
        self.keep_ = keep
        self.mean_ = mean[keep]
        self.scale_ = scale[keep]
        self.feature_names_out_ = [n for n, k in zip(names, keep) if k]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_matrix(X, n_features=self.n_features_in_)
        return (X[:, self.keep_] - self.mean_) / self.scale_

    def to_dict(self):
        return {
            "n_features_in": int(self.n_features_in_),
            "keep": self.keep_.tolist(),
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
            "feature_names_out": list(self.feature_names_out_),
            "dropped": list(self.dropped_),
        }

    @classmethod
    def from_dict(cls, d):
        s = cls()
        s.n_features_in_ = d["n_features_in"]
        s.keep_ = np.asarray(d["keep"], dtype=bool)
        s.mean_ = np.asarray(d["mean"], dtype=np.float64)
        s.scale_ = np.asarray(d["scale"], dtype=np.float64)
        s.feature_names_out_ = list(d["feature_names_out"])
        s.dropped_ = list(d["dropped"])
        return s


def standardize_fit(data):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scaler = Standardizer(column_names=data.column_names).fit(data.features)
    if scaler.dropped_:
        warnings.warn(f"dropping zero-variance columns: {scaler.dropped_}", stacklevel=2)
    return scaler, standardize_apply(scaler, data)


def standardize_apply(scaler, data):
    return Dataset(scaler.transform(data.features), data.labels, scaler.feature_names_out_, data.label_name)


def largest_remainder(total, fractions):
    """Integer parts of ``total`` proportional to ``fractions``, summing to
    ``total``; leftover units go to the largest remainders, earliest first."""
    quotas = [total * f for f in fractions]
    sizes = [int(np.floor(q)) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[: total - sum(sizes)]:
        sizes[i] += 1
    return sizes


def split(data, fractions=DEFAULT_FRACTIONS, seed=0):
    """Stratified, seeded train/valid/test split.

    Each class is shuffled and divided with :func:`largest_remainder`, so the
    class ratio of every split tracks the overall ratio.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidParameterError(f"fractions must be three positive numbers summing to 1, got {fractions}")
    rng = np.random.default_rng(seed)
    parts = [[], [], []]
    for cls in (1, 0):
        idx = np.flatnonzero(data.labels == cls)
        idx = idx[rng.permutation(idx.size)]
        sizes = largest_remainder(idx.size, fractions)
        name = "positive" if cls == 1 else "negative"
        if min(sizes) == 0:
            raise ClassTooSmallError(
                f"{idx.size} {name} rows cannot cover all three splits {fractions}"
            )
        start = 0
        for part, size in zip(parts, sizes):
            part.append(idx[start : start + size])
            start += size
    train, valid, test = (data.take(np.sort(np.concatenate(p))) for p in parts)
    return SplitDataset(train, valid, test, seed, fractions)
