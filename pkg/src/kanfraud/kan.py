"""Kolmogorov-Arnold networks for binary classification.

Each edge ``i -> j`` of a layer carries its own univariate function

    phi_ji(x) = w_ji * silu(x) + spline_ji(x)

and node ``j`` of the next layer is ``b_j + sum_i phi_ji(x_i)``. The single
output node is a logit; probabilities come from the logistic sigmoid.

The functional API (``kan_new``, ``kan_forward``, ``kan_backward``,
``kan_train``, ``kan_predict``) operates on plain :class:`KanModel` values.
:class:`KANClassifier` wraps it in the scikit-learn estimator protocol.
"""
import copy
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_matrix
from .exceptions import (
    EmptyDatasetError,
    InvalidParameterError,
    UnreadableModelError,
)
from .spline import SplineFunction, basis_matrix, basis_with_derivative, make_knots

__all__ = [
    "KanConfig",
    "KanLayer",
    "KanModel",
    "LayerGradient",
    "KANClassifier",
    "kan_new",
    "kan_forward",
    "kan_backward",
    "kan_loss_and_gradients",
    "kan_train",
    "kan_predict",
    "spline_coefficient_count",
    "save_model",
    "load_model",
]

MODEL_FORMAT = "kanfraud.model"
MODEL_VERSION = 1

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass
class KanConfig:
    width: list
    k: int = 15
    grid: int = 5
    epochs: int = 200
    learning_rate: float = 0.01
    seed: int = 0
    classification_threshold: float = 0.5
    domain: tuple = (-1.0, 1.0)

    def __post_init__(self):
        self.width = [int(w) for w in self.width]
        self.domain = (float(self.domain[0]), float(self.domain[1]))
        self.validate()

    def validate(self):
        if len(self.width) < 2:
            raise InvalidParameterError("width needs at least an input and an output layer")
        if any(w < 1 for w in self.width):
            raise InvalidParameterError(f"layer widths must be positive, got {self.width}")
        if self.width[-1] != 1:
            raise InvalidParameterError("the output layer must have exactly one node")
        if self.k < 1 or self.grid < 1:
            raise InvalidParameterError(f"k and grid must be >= 1, got k={self.k} grid={self.grid}")
        if self.epochs < 1:
            raise InvalidParameterError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise InvalidParameterError("learning_rate must be positive")
        if self.seed < 0:
            raise InvalidParameterError("seed must be non-negative")
        if not 0.0 < self.classification_threshold < 1.0:
            raise InvalidParameterError("classification_threshold must lie in (0, 1)")
        if not self.domain[0] < self.domain[1]:
            raise InvalidParameterError(f"empty spline domain {self.domain}")

    def to_dict(self):
        d = asdict(self)
        d["domain"] = list(self.domain)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class KanLayer:
    """One layer: ``out_dim x in_dim`` edges sharing a single knot vector.

    ``coeffs[j, i]`` are the spline coefficients of the edge from input ``i``
    to output ``j``.
    """

    in_dim: int
    out_dim: int
    knots: object
    coeffs: np.ndarray
    base_weights: np.ndarray
    biases: np.ndarray

    def edge_spline(self, j, i):
        return SplineFunction(self.knots, self.coeffs[j, i])

    @property
    def edge_splines(self):
        return [[self.edge_spline(j, i) for i in range(self.in_dim)] for j in range(self.out_dim)]

    def parameters(self):
        return [self.coeffs, self.base_weights, self.biases]


@dataclass
class KanModel:
    config: KanConfig
    layers: list
    training_log: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def n_inputs(self):
        return self.config.width[0]

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]

    def n_parameters(self):
        return sum(p.size for p in self.parameters())


@dataclass
class LayerGradient:
    coeffs: np.ndarray
    base_weights: np.ndarray
    biases: np.ndarray

    def arrays(self):
        return [self.coeffs, self.base_weights, self.biases]


def spline_coefficient_count(config):
    w = config.width
    return sum(a * b for a, b in zip(w[:-1], w[1:])) * (config.grid + config.k)


def kan_new(config):
    """Seeded initialisation: spline coefficients ~ N(0, 0.1), silu weights
    ~ U(-1/sqrt(in), 1/sqrt(in)), biases zero."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    knots = make_knots(config.domain[0], config.domain[1], config.grid, config.k)
    layers = []
    for n_in, n_out in zip(config.width[:-1], config.width[1:]):
        coeffs = rng.normal(0.0, 0.1, size=(n_out, n_in, knots.n_basis))
        bound = 1.0 / np.sqrt(n_in)
        base = rng.uniform(-bound, bound, size=(n_out, n_in))
        layers.append(KanLayer(n_in, n_out, knots, coeffs, base, np.zeros(n_out)))
    return KanModel(config=copy.deepcopy(config), layers=layers)


def _silu(x):
    return x * expit(x)


def _silu_grad(x):
    s = expit(x)
    return s * (1.0 + x * (1.0 - s))


def _layer_forward(layer, a, basis=None):
    n = a.shape[0]
    if basis is None:
        basis = basis_matrix(layer.knots, a)
    flat_c = layer.coeffs.reshape(layer.out_dim, -1)
    return layer.biases + _silu(a) @ layer.base_weights.T + basis.reshape(n, -1) @ flat_c.T


def _forward_batch(model, X):
    a = X
    for layer in model.layers:
        a = _layer_forward(layer, a)
    return a[:, 0]


def kan_forward(model, x):
    """Pre-sigmoid score. ``x`` may be one row (returns a float) or a matrix."""
    x_arr = np.asarray(x, dtype=np.float64)
    single = x_arr.ndim == 1
    X = check_matrix(x_arr, n_features=model.n_inputs)
    scores = _forward_batch(model, X)
    return float(scores[0]) if single else scores


def kan_loss_and_gradients(model, X, y, first_basis=None):
    """Mean binary cross-entropy over the batch and its gradients.

    ``first_basis`` lets training reuse the first layer's basis tensor, which
    depends only on the (fixed) inputs.
    """
    activations, bases, dbases = [X], [], []
    a = X
    for idx, layer in enumerate(model.layers):
        if idx == 0:
            basis = first_basis if first_basis is not None else basis_matrix(layer.knots, a)
            dbasis = None
        else:
            basis, dbasis = basis_with_derivative(layer.knots, a)
        bases.append(basis)
        dbases.append(dbasis)
        a = _layer_forward(layer, a, basis)
        activations.append(a)
    score = a[:, 0]
    n = X.shape[0]
    # softplus(s) - y*s, computed stably
    loss = float(np.mean(np.logaddexp(0.0, score) - y * score))
    delta = ((expit(score) - y) / n)[:, None]

    grads = [None] * len(model.layers)
    for idx in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[idx]
        a_in = activations[idx]
        basis = bases[idx].reshape(n, -1)
        flat_c = layer.coeffs.reshape(layer.out_dim, -1)
        grads[idx] = LayerGradient(
            coeffs=(delta.T @ basis).reshape(layer.coeffs.shape),
            base_weights=delta.T @ _silu(a_in),
            biases=delta.sum(axis=0),
        )
        if idx > 0:
            back = (delta @ flat_c).reshape(n, layer.in_dim, -1)
            delta = (delta @ layer.base_weights) * _silu_grad(a_in) + np.sum(back * dbases[idx], axis=-1)
    return loss, grads


def kan_backward(model, x, target):
    """Gradients of the cross-entropy loss for a single example."""
    if target not in (0, 1):
        raise InvalidParameterError(f"target must be 0 or 1, got {target}")
    X = check_matrix(np.asarray(x, dtype=np.float64).reshape(1, -1), n_features=model.n_inputs)
    _, grads = kan_loss_and_gradients(model, X, np.array([float(target)]))
    return grads


def _unpack(data):
    if isinstance(data, tuple):
        return data
    return data.features, data.labels


def _f1(y, pred):
    tp = np.sum((pred == 1) & (y == 1))
    denom = 2 * tp + np.sum((pred == 1) & (y == 0)) + np.sum((pred == 0) & (y == 1))
    return 2.0 * tp / denom if denom else 0.0


def kan_train(model, train, valid):
    """Full-batch Adam on the cross-entropy loss.

    ``train`` and ``valid`` are datasets (anything with ``features`` and
    ``labels``) or ``(X, y)`` tuples. Returns a new model holding the
    parameters from the epoch with the best validation F1 (earliest on
    ties); ``training_log`` holds ``(epoch, loss)`` with the loss measured at
    the start of each epoch.
    """
    X, y = _unpack(train)
    Xv, yv = _unpack(valid)
    for arr, name in ((X, "train"), (Xv, "valid")):
        if np.asarray(arr).shape[0] == 0:
            raise EmptyDatasetError(f"{name} split is empty")
    X = check_matrix(X, n_features=model.n_inputs, name="train features")
    Xv = check_matrix(Xv, n_features=model.n_inputs, name="valid features")
    y = check_binary_labels(y, X.shape[0]).astype(np.float64)
    yv = check_binary_labels(yv, Xv.shape[0])

    cfg = model.config
    model = copy.deepcopy(model)
    params = model.parameters()
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    first_basis = basis_matrix(model.layers[0].knots, X)
    first_basis_valid = basis_matrix(model.layers[0].knots, Xv)

    def valid_f1():
        a = _layer_forward(model.layers[0], Xv, first_basis_valid)
        for layer in model.layers[1:]:
            a = _layer_forward(layer, a)
        pred = (expit(a[:, 0]) >= cfg.classification_threshold).astype(np.int64)
        return _f1(yv, pred)

    best_f1 = valid_f1()
    best = [p.copy() for p in params]
    log = []
    for epoch in range(1, cfg.epochs + 1):
        loss, grads = kan_loss_and_gradients(model, X, y, first_basis)
        log.append((epoch, loss))
        flat_grads = [g for lg in grads for g in lg.arrays()]
        c1 = 1.0 - _ADAM_BETA1**epoch
        c2 = 1.0 - _ADAM_BETA2**epoch
        for p, g, mi, vi in zip(params, flat_grads, m, v):
            mi *= _ADAM_BETA1
            mi += (1.0 - _ADAM_BETA1) * g
            vi *= _ADAM_BETA2
            vi += (1.0 - _ADAM_BETA2) * g * g
            p -= cfg.learning_rate * (mi / c1) / (np.sqrt(vi / c2) + _ADAM_EPS)
        f1 = valid_f1()
        if f1 > best_f1:
            best_f1 = f1
            best = [p.copy() for p in params]
    for p, b in zip(params, best):
        p[...] = b
    model.training_log = log
    model.metadata = dict(model.metadata, best_valid_f1=float(best_f1))
    return model


def kan_predict(model, x):
    """``(probability, label)`` for one row, or arrays of both for a matrix."""
    score = kan_forward(model, x)
    prob = expit(score)
    label = (prob >= model.config.classification_threshold)
    if np.ndim(prob) == 0:
        return float(prob), int(label)
    return prob, label.astype(np.int64)


def _model_to_dict(model):
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": model.config.to_dict(),
        "layers": [
            {
                "in_dim": layer.in_dim,
                "out_dim": layer.out_dim,
                "knots": layer.knots.to_dict(),
                "coeffs": layer.coeffs.tolist(),
                "base_weights": layer.base_weights.tolist(),
                "biases": layer.biases.tolist(),
            }
            for layer in model.layers
        ],
        "training_log": [[int(e), float(loss)] for e, loss in model.training_log],
        "metadata": model.metadata,
    }


def _model_from_dict(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise UnreadableModelError(f"not a model document (format={doc.get('format')!r})")
    if doc.get("version") != MODEL_VERSION:
        raise UnreadableModelError(f"unsupported model version {doc.get('version')!r}")
    config = KanConfig.from_dict(doc["config"])
    layers = []
    for ld in doc["layers"]:
        kd = ld["knots"]
        knots = make_knots(kd["domain_lo"], kd["domain_hi"], kd["grid"], kd["degree"])
        if not np.array_equal(knots.knots, np.asarray(kd["knots"])):
            raise UnreadableModelError("stored knot vector does not match its construction")
        layer = KanLayer(
            ld["in_dim"],
            ld["out_dim"],
            knots,
            np.asarray(ld["coeffs"], dtype=np.float64),
            np.asarray(ld["base_weights"], dtype=np.float64),
            np.asarray(ld["biases"], dtype=np.float64),
        )
        if layer.coeffs.shape != (layer.out_dim, layer.in_dim, knots.n_basis):
            raise UnreadableModelError("coefficient array has the wrong shape")
        layers.append(layer)
    log = [(int(e), float(loss)) for e, loss in doc.get("training_log", [])]
    return KanModel(config, layers, log, doc.get("metadata", {}))


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return _model_from_dict(doc)
    except FileNotFoundError:
        raise UnreadableModelError(f"model file not found: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UnreadableModelError):
            raise
        raise UnreadableModelError(f"cannot read model file {path}: {exc}") from None


class KANClassifier(ClassifierMixin, BaseEstimator):
    """Scikit-learn wrapper around the functional KAN API.

    Parameters
    ----------
    hidden_width : int or list of int, optional
        Hidden layer widths. ``None`` applies the pyramid rule: one hidden
        layer of ``max(1, n_features // 2)`` nodes.
    k : int
        Spline degree.
    grid : int
        Intervals per edge spline.
    epochs, learning_rate : training budget for full-batch Adam.
    threshold : float
        Probability cut-off used by :meth:`predict`.
    domain : tuple
        Spline domain; inputs are clamped into it.
    random_state : int
        Seed for initialisation.
    validation_fraction : float
        Share of the training rows held out for model selection when
        ``fit`` is not given an explicit validation set.
    """

    def __init__(
        self,
        hidden_width=None,
        k=15,
        grid=5,
        epochs=200,
        learning_rate=0.01,
        threshold=0.5,
        domain=(-1.0, 1.0),
        random_state=0,
        validation_fraction=0.125,
    ):
        self.hidden_width = hidden_width
        self.k = k
        self.grid = grid
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.threshold = threshold
        self.domain = domain
        self.random_state = random_state
        self.validation_fraction = validation_fraction

    def _make_config(self, n_features):
        if self.hidden_width is None:
            hidden = [max(1, n_features // 2)]
        elif np.isscalar(self.hidden_width):
            hidden = [int(self.hidden_width)]
        else:
            hidden = list(self.hidden_width)
        return KanConfig(
            width=[n_features, *hidden, 1],
            k=self.k,
            grid=self.grid,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            seed=self.random_state,
            classification_threshold=self.threshold,
            domain=tuple(self.domain),
        )

    def fit(self, X, y, X_valid=None, y_valid=None):
        X = check_matrix(X)
        y = check_binary_labels(y, X.shape[0], require_both=True)
        if X_valid is None:
            X, X_valid, y, y_valid = train_test_split(
                X,
                y,
                test_size=self.validation_fraction,
                stratify=y,
                random_state=self.random_state,
            )
        config = self._make_config(X.shape[1])
        self.model_ = kan_train(kan_new(config), (X, y), (X_valid, y_valid))
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_model(cls, model):
        cfg = model.config
        est = cls(
            hidden_width=cfg.width[1:-1],
            k=cfg.k,
            grid=cfg.grid,
            epochs=cfg.epochs,
            learning_rate=cfg.learning_rate,
            threshold=cfg.classification_threshold,
            domain=cfg.domain,
            random_state=cfg.seed,
        )
        est.model_ = model
        est.classes_ = np.array([0, 1])
        est.n_features_in_ = cfg.width[0]
        return est

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_matrix(X, n_features=self.n_features_in_)
        return _forward_batch(self.model_, X)

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(np.int64)

    @property
    def training_log_(self):
        check_is_fitted(self, "model_")
        return self.model_.training_log
