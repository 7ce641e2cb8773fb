"""Hyperparameter selection for three-layer KANs ``[d, width2, 1]``.

Three strategies share one evaluation routine (train on the train split,
score F1 on the validation split):

* :func:`heuristic_config` - pyramid width, ``k=15``, ``grid=5``; no search.
* :func:`grid_search` - exhaustive sweep over a :class:`SearchSpace`.
* :func:`ga_search` - genetic algorithm over ``(width2, k, grid)`` genomes.

Every ranking uses the same total order: F1 descending, then precision
descending, then the genome lexicographically.
"""
import csv
import gc
import io
import itertools
import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from joblib import Parallel, delayed

from .exceptions import InvalidParameterError, InvalidTimesError, KanFraudError
from .kan import KanConfig, kan_new, kan_predict, kan_train
from .metrics import CSV_COLUMNS, MetricsReport, compute_metrics, csv_row, format_width

__all__ = [
    "SearchSpace",
    "Genome",
    "GaConfig",
    "TrialRecord",
    "GenerationStats",
    "GaResult",
    "SearchTimeEstimate",
    "heuristic_config",
    "enumerate_grid",
    "estimate_search_time",
    "evaluate_genome",
    "grid_search",
    "ga_search",
    "rank_trials",
    "trials_csv",
    "trials_json",
]

HEURISTIC_K = 15
HEURISTIC_GRID = 5


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive integer intervals for each gene."""

    width2: tuple = (3, 30)
    k: tuple = (3, 20)
    grid: tuple = (3, 30)

    def __post_init__(self):
        for name in ("width2", "k", "grid"):
            lo, hi = (int(v) for v in getattr(self, name))
            if lo < 1 or hi < lo:
                raise InvalidParameterError(f"{name} interval must satisfy 1 <= lo <= hi, got {lo}..{hi}")
            object.__setattr__(self, name, (lo, hi))

    def intervals(self):
        return (self.width2, self.k, self.grid)

    @property
    def size(self):
        return math.prod(hi - lo + 1 for lo, hi in self.intervals())

    def contains(self, genome):
        return all(lo <= g <= hi for g, (lo, hi) in zip(genome, self.intervals()))

    def clamp(self, genome):
        return Genome(*(min(max(g, lo), hi) for g, (lo, hi) in zip(genome, self.intervals())))


class Genome(NamedTuple):
    width2: int
    k: int
    grid: int

    def width(self, input_dim):
        return [input_dim, self.width2, 1]


@dataclass(frozen=True)
class GaConfig:
    population: int = 20
    generations: int = 20
    cxpb: float = 0.5
    mutpb: float = 0.2
    tournament_size: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise InvalidParameterError("population must be >= 2")
        if self.generations < 0:
            raise InvalidParameterError("generations must be >= 0")
        if not (0.0 <= self.cxpb <= 1.0 and 0.0 <= self.mutpb <= 1.0):
            raise InvalidParameterError("cxpb and mutpb must lie in [0, 1]")
        if self.tournament_size < 1:
            raise InvalidParameterError("tournament_size must be >= 1")


@dataclass
class TrialRecord:
    genome: Genome
    metrics: Optional[MetricsReport]
    train_seconds: float = 0.0
    error: Optional[str] = None

    @property
    def fitness(self):
        if self.metrics is None or self.metrics.f1 is None:
            return 0.0
        return self.metrics.f1

    def rank_key(self):
        precision = 0.0
        if self.metrics is not None and self.metrics.precision is not None:
            precision = self.metrics.precision
        return (-self.fitness, -precision, tuple(self.genome))


def rank_trials(trials):
    return sorted(trials, key=TrialRecord.rank_key)


@dataclass(frozen=True)
class SearchTimeEstimate:
    mean_s: float
    total_s: float
    total_h: float


def heuristic_config(input_dim, **overrides):
    """Pyramid width ``[d, max(1, d // 2), 1]`` with ``k=15`` and ``grid=5``."""
    if int(input_dim) != input_dim or input_dim < 2:
        raise InvalidParameterError(f"input_dim must be an integer >= 2, got {input_dim}")
    input_dim = int(input_dim)
    params = {"width": [input_dim, max(1, input_dim // 2), 1], "k": HEURISTIC_K, "grid": HEURISTIC_GRID}
    params.update(overrides)
    return KanConfig(**params)


def enumerate_grid(space):
    """All genomes in lexicographic ``(width2, k, grid)`` order."""
    ranges = [range(lo, hi + 1) for lo, hi in space.intervals()]
    # tens of thousands of small acyclic tuples: cyclic GC passes would only add latency
    enabled = gc.isenabled()
    gc.disable()
    try:
        return list(map(Genome._make, itertools.product(*ranges)))
    finally:
        if enabled:
            gc.enable()


def estimate_search_time(shortest_s, longest_s, count, round_mean=False):
    """Mean of the shortest and longest run times, times the number of runs.

    ``round_mean`` first rounds the mean to the nearest whole second
    (halves round up), as a back-of-the-envelope estimate would.
    """
    if not (shortest_s > 0 and longest_s >= shortest_s):
        raise InvalidTimesError(f"need 0 < shortest <= longest, got {shortest_s}, {longest_s}")
    if int(count) != count or count < 1:
        raise InvalidTimesError(f"count must be a positive integer, got {count}")
    mean = (shortest_s + longest_s) / 2.0
    if round_mean:
        mean = float(math.floor(mean + 0.5))
    total = mean * int(count)
    return SearchTimeEstimate(mean, total, total / 3600.0)


def _template(base):
    return base if base is not None else KanConfig(width=[2, 1, 1])


def evaluate_genome(genome, data, base_config=None):
    """Train ``[d, width2, 1]`` with the genome's ``k``/``grid`` and score the
    validation split. Failures are caught and recorded, never raised."""
    base = _template(base_config)
    start = time.perf_counter()
    try:
        cfg = replace(base, width=genome.width(data.train.n_features), k=genome.k, grid=genome.grid)
        model = kan_train(kan_new(cfg), data.train, data.valid)
        probs, _ = kan_predict(model, data.valid.features)
        metrics = compute_metrics(probs, data.valid.labels, cfg.classification_threshold)
        return TrialRecord(genome, metrics, time.perf_counter() - start)
    except (KanFraudError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return TrialRecord(genome, None, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")


def _evaluate_many(genomes, data, base_config, n_jobs):
    return Parallel(n_jobs=n_jobs)(delayed(evaluate_genome)(g, data, base_config) for g in genomes)


def grid_search(space, data, budget=None, base_config=None, n_jobs=1):
    """Train one model per genome (the first ``budget`` in enumeration order
    when a budget is given) and return the trials ranked best first."""
    genomes = enumerate_grid(space)
    if budget is not None:
        if budget < 1:
            raise InvalidParameterError("budget must be >= 1")
        genomes = genomes[:budget]
    return rank_trials(_evaluate_many(genomes, data, base_config, n_jobs))


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    worst_fitness: float
    best_genome: Genome
    evaluations: int

    def to_dict(self):
        return {
            "generation": self.generation,
            "best_fitness": self.best_fitness,
            "mean_fitness": self.mean_fitness,
            "worst_fitness": self.worst_fitness,
            "best_genome": list(self.best_genome),
            "evaluations": self.evaluations,
        }


@dataclass
class GaResult:
    best: TrialRecord
    history: list
    trials: list = field(default_factory=list)


def _random_genome(rng, space):
    return Genome(*(int(rng.integers(lo, hi + 1)) for lo, hi in space.intervals()))


def ga_search(space, ga, data, base_config=None, n_jobs=1):
    """Generational GA with elitism 1.

    Each generation: tournament selection of ``population - 1`` parents,
    uniform crossover of consecutive pairs with probability ``cxpb``,
    random-reset mutation with probability ``mutpb`` per individual (each
    gene then reset with probability 1/3), evaluation, and replacement with
    the offspring plus the previous generation's best. Fitness is validation
    F1; a genome is trained at most once since training is deterministic.
    """
    rng = np.random.default_rng(ga.seed)
    cache = {}

    def evaluate(population):
        fresh = sorted({g for g in population if g not in cache})
        for trial in _evaluate_many(fresh, data, base_config, n_jobs):
            cache[trial.genome] = trial
        return [cache[g] for g in population]

    def stats(gen, scored):
        fit = np.array([t.fitness for t in scored])
        best = rank_trials(scored)[0]
        return GenerationStats(gen, float(fit.max()), float(fit.mean()), float(fit.min()), best.genome, len(cache))

    population = [_random_genome(rng, space) for _ in range(ga.population)]
    scored = evaluate(population)
    history = [stats(0, scored)]
    for gen in range(1, ga.generations + 1):
        elite = rank_trials(scored)[0]
        parents = []
        for _ in range(ga.population - 1):
            picks = rng.integers(0, len(scored), size=ga.tournament_size)
            parents.append(min((scored[i] for i in picks), key=TrialRecord.rank_key).genome)
        offspring = [list(g) for g in parents]
        for i in range(1, len(offspring), 2):
            if rng.random() < ga.cxpb:
                a, b = offspring[i - 1], offspring[i]
                for j in range(3):
                    if rng.random() < 0.5:
                        a[j], b[j] = b[j], a[j]
        for child in offspring:
            if rng.random() < ga.mutpb:
                for j, (lo, hi) in enumerate(space.intervals()):
                    if rng.random() < 1.0 / 3.0:
                        child[j] = int(rng.integers(lo, hi + 1))
        population = [elite.genome] + [space.clamp(c) for c in offspring]
        scored = evaluate(population)
        history.append(stats(gen, scored))
    best = rank_trials(scored)[0]
    return GaResult(best=best, history=history, trials=rank_trials(cache.values()))


def trials_csv(trials, input_dim):
    """Ranked trial log, one row per trial, hyperparameter columns first."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS + ["Error"])
    for t in trials:
        hyper = (t.genome.width(input_dim), t.genome.k, t.genome.grid)
        if t.metrics is None:
            row = [format_width(hyper[0]), t.genome.k, t.genome.grid] + [""] * (len(CSV_COLUMNS) - 3)
        else:
            row = csv_row(t.metrics, hyper)
        writer.writerow(row + [t.error or ""])
    return buf.getvalue()


def trials_json(trials, input_dim, history=None):
    doc = {
        "trials": [
            {
                "width": t.genome.width(input_dim),
                "k": t.genome.k,
                "grid": t.genome.grid,
                "metrics": None if t.metrics is None else t.metrics.to_dict(),
                "train_seconds": t.train_seconds,
                "error": t.error,
            }
            for t in trials
        ]
    }
    if history is not None:
        doc["history"] = [h.to_dict() for h in history]
    return json.dumps(doc, indent=2) + "\n"
