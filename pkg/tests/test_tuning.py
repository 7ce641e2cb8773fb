import csv
import io
import json
import math
import random
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kanfraud.exceptions import InvalidParameterError, InvalidTimesError
from kanfraud.kan import KanConfig
from kanfraud.metrics import CSV_COLUMNS
from kanfraud.tuning import (
    GaConfig,
    Genome,
    SearchSpace,
    TrialRecord,
    enumerate_grid,
    estimate_search_time,
    evaluate_genome,
    ga_search,
    grid_search,
    heuristic_config,
    rank_trials,
    trials_csv,
    trials_json,
)

FAST = KanConfig(width=[2, 1, 1], epochs=25)

REPORTED_WIDTHS = {30: [30, 15, 1], 51: [51, 25, 1], 27: [27, 13, 1], 35: [35, 17, 1], 50: [50, 25, 1]}


@pytest.mark.parametrize("dim,width", sorted(REPORTED_WIDTHS.items()))
def test_heuristic_matches_reported_configs(dim, width):
    cfg = heuristic_config(dim)
    assert cfg.width == width and cfg.k == 15 and cfg.grid == 5


def test_heuristic_edge_and_errors():
    assert heuristic_config(2).width == [2, 1, 1]
    assert heuristic_config(3).width == [3, 1, 1]
    assert heuristic_config(30).epochs == KanConfig(width=[1, 1]).epochs
    for bad in (1, 0, -3, 2.5):
        with pytest.raises(InvalidParameterError):
            heuristic_config(bad)


def test_grid_size_defaults():
    genomes = enumerate_grid(SearchSpace())
    assert len(genomes) == 14112 == 28 * 18 * 28
    assert genomes[0] == Genome(3, 3, 3) and genomes[-1] == Genome(30, 20, 30)


def test_grid_small_spaces():
    assert enumerate_grid(SearchSpace((5, 5), (7, 7), (9, 9))) == [Genome(5, 7, 9)]
    assert enumerate_grid(SearchSpace((3, 4), (3, 3), (3, 4))) == [
        Genome(3, 3, 3), Genome(3, 3, 4), Genome(4, 3, 3), Genome(4, 3, 4)
    ]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 6), st.integers(0, 5)), min_size=3, max_size=3))
def test_grid_size_is_product(spec):
    space = SearchSpace(*[(lo, lo + span) for lo, span in spec])
    genomes = enumerate_grid(space)
    assert len(genomes) == math.prod(span + 1 for _, span in spec) == space.size
    assert genomes == sorted(genomes)
    assert all(space.contains(g) for g in genomes)


@pytest.mark.parametrize("intervals", [((0, 3), (3, 3), (3, 3)), ((5, 4), (3, 3), (3, 3))])
def test_invalid_space(intervals):
    with pytest.raises(InvalidParameterError):
        SearchSpace(*intervals)


def test_estimate_rounded_and_exact():
    rounded = estimate_search_time(14, 105, 14112, round_mean=True)
    assert rounded.mean_s == 60 and rounded.total_s == 846720 and rounded.total_h == 235.2
    exact = estimate_search_time(14, 105, 14112)
    assert exact.mean_s == 59.5 and exact.total_s == 839664
    assert estimate_search_time(10, 10, 1).total_s == 10


@pytest.mark.parametrize("args", [(0, 1, 1), (5, 4, 1), (1, 2, 0), (-1, 2, 3), (1, 2, 1.5)])
def test_estimate_rejects(args):
    with pytest.raises(InvalidTimesError):
        estimate_search_time(*args)


def _trial(genome, f1, precision):
    from kanfraud.metrics import ConfusionCounts, MetricsReport

    return TrialRecord(Genome(*genome), MetricsReport(precision, 0.5, f1, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5,
                                                      ConfusionCounts(1, 1, 1, 1)))


def test_ranking_is_total_order():
    trials = [
        _trial((3, 3, 3), 0.8, 0.7), _trial((3, 3, 4), 0.8, 0.9), _trial((4, 3, 3), 0.9, 0.1),
        _trial((3, 4, 3), 0.8, 0.9), TrialRecord(Genome(5, 5, 5), None, error="boom"),
    ]
    expected = rank_trials(trials)
    assert [t.genome for t in expected] == [(4, 3, 3), (3, 3, 4), (3, 4, 3), (3, 3, 3), (5, 5, 5)]
    rng = random.Random(0)
    for _ in range(20):
        shuffled = trials[:]
        rng.shuffle(shuffled)
        assert rank_trials(shuffled) == expected


def test_grid_search_small_and_reproducible(blob_split):
    space = SearchSpace((2, 3), (2, 3), (3, 4))
    first = grid_search(space, blob_split, base_config=FAST)
    second = grid_search(space, blob_split, base_config=FAST)
    assert len(first) == 8
    assert [t.genome for t in first] == [t.genome for t in second]
    assert [t.metrics for t in first] == [t.metrics for t in second]
    assert first == rank_trials(first)


def test_grid_search_budget(blob_split):
    trials = grid_search(SearchSpace(), blob_split, budget=3, base_config=FAST)
    assert sorted(t.genome for t in trials) == enumerate_grid(SearchSpace())[:3]
    with pytest.raises(InvalidParameterError):
        grid_search(SearchSpace(), blob_split, budget=0)


def test_failed_trial_recorded(blob_split):
    bad_base = KanConfig(width=[2, 1, 1], epochs=2)
    assert evaluate_genome(Genome(3, 3, 3), blob_split, bad_base).error is None
    broken = type(blob_split)(blob_split.train, blob_split.valid.take(np.array([], dtype=int)),
                              blob_split.test, 0, blob_split.fractions)
    trial = evaluate_genome(Genome(3, 3, 3), broken, bad_base)
    assert trial.metrics is None and trial.fitness == 0.0 and "EmptyDatasetError" in trial.error


def test_ga_elitism_bounds_and_determinism(small_split):
    space = SearchSpace((3, 5), (3, 5), (3, 5))
    ga = GaConfig(population=6, generations=4, seed=11)
    a = ga_search(space, ga, small_split, base_config=FAST)
    b = ga_search(space, ga, small_split, base_config=FAST)
    assert [h.to_dict() for h in a.history] == [h.to_dict() for h in b.history]
    best = [h.best_fitness for h in a.history]
    assert all(x <= y for x, y in zip(best, best[1:]))
    assert len(a.history) == 5
    assert all(space.contains(t.genome) for t in a.trials)
    assert a.best.fitness == best[-1]
    assert a.best.metrics.auc_roc is not None and a.best.metrics.logloss is not None


def test_ga_mutation_stays_inside_narrow_space(small_split):
    space = SearchSpace((3, 3), (2, 4), (3, 3))
    result = ga_search(space, GaConfig(population=4, generations=3, mutpb=1.0, cxpb=1.0, seed=2), small_split,
                       base_config=FAST)
    assert all(space.contains(t.genome) for t in result.trials)


@pytest.mark.parametrize("kwargs", [{"population": 1}, {"cxpb": 1.5}, {"mutpb": -0.1}, {"tournament_size": 0}])
def test_invalid_ga_config(kwargs):
    with pytest.raises(InvalidParameterError):
        GaConfig(**kwargs)


def test_clamp():
    space = SearchSpace((3, 5), (3, 5), (3, 5))
    assert space.clamp((1, 9, 4)) == Genome(3, 5, 4)


def test_trial_logs_layout(blob_split):
    trials = grid_search(SearchSpace((2, 2), (2, 2), (3, 4)), blob_split, base_config=FAST)
    rows = list(csv.reader(io.StringIO(trials_csv(trials, 4))))
    assert rows[0][:6] == ["Width", "K", "Grid", "Precision", "Recall", "F1 Score"]
    assert rows[0] == CSV_COLUMNS + ["Error"]
    assert rows[1][0] == "{4, 2, 1}" and len(rows) == 3
    doc = json.loads(trials_json(trials, 4))
    assert [t["grid"] for t in doc["trials"]] == [int(r[2]) for r in rows[1:]]
    assert "train_seconds" in doc["trials"][0]


def test_enumerate_is_fast():
    start = time.perf_counter()
    enumerate_grid(SearchSpace())
    assert time.perf_counter() - start < 0.01
