"""Kolmogorov-Arnold networks for binary fraud classification.

Spline-edged networks, three ways to choose their hyperparameters (pyramid
heuristic, exhaustive grid, genetic algorithm), and a PCA-based check of
whether a dataset is worth training a KAN on at all.
"""
__version__ = "0.1.0"

from .data import Dataset, SplitDataset, balance, encode_numeric, load_csv, split, Standardizer
from .kan import KANClassifier, KanConfig, KanModel, kan_new, kan_predict, kan_train, load_model, save_model
from .metrics import LogisticBaseline, MetricsReport, compute_metrics, render_report
from .pca import TwoComponentPCA, pca_fit, pca_transform
from .separability import SplineSeparabilityAssessor, assess_separability, quick_decision
from .spline import KnotVector, SplineFunction, basis_values, make_knots, spline_eval
from .tuning import (
    GaConfig,
    Genome,
    SearchSpace,
    enumerate_grid,
    estimate_search_time,
    ga_search,
    grid_search,
    heuristic_config,
)

__all__ = [
    "Dataset", "SplitDataset", "Standardizer", "balance", "encode_numeric", "load_csv", "split",
    "KANClassifier", "KanConfig", "KanModel", "kan_new", "kan_predict", "kan_train", "load_model", "save_model",
    "LogisticBaseline", "MetricsReport", "compute_metrics", "render_report",
    "TwoComponentPCA", "pca_fit", "pca_transform",
    "SplineSeparabilityAssessor", "assess_separability", "quick_decision",
    "KnotVector", "SplineFunction", "basis_values", "make_knots", "spline_eval",
    "GaConfig", "Genome", "SearchSpace", "enumerate_grid", "estimate_search_time", "ga_search",
    "grid_search", "heuristic_config",
]
