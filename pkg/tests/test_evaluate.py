import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elasticdepth.detect import BoxplotConfig
from elasticdepth.evaluate import (
    f1_experiment,
    f1_score,
    k_sensitivity_sweep,
    rank_experiment,
    summarize,
    undersampling_skewness,
)

SMALL = {"n_inlier": 12, "n_outlier": 3, "grid_size": 12}


def test_f1_worked_example():
    out = f1_score([1] * 9 + [0, 0], [1] * 8 + [0, 1, 1])
    assert (out.tp, out.fp, out.fn, out.tn) == (8, 1, 2, 0)
    assert out.f1 == pytest.approx(16 / 19)


def test_f1_edge_cases():
    assert f1_score([0, 0, 0], [0, 0, 0]).f1 == 0.0
    assert f1_score([1, 0], [1, 0]).f1 == 1.0
    assert f1_score([0, 1], [1, 0]).f1 == 0.0
    with pytest.raises(ValueError):
        f1_score([1, 0], [1])


@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40), st.randoms())
def test_f1_ignores_order(pairs, rnd):
    flags, labels = map(list, zip(*pairs))
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    f2, l2 = map(list, zip(*shuffled))
    a, b = f1_score(flags, labels), f1_score(f2, l2)
    assert a == b
    assert 0.0 <= a.f1 <= 1.0
    assert a.tp + a.fp + a.fn + a.tn == len(pairs)


def test_summaries():
    assert summarize("rank", [{"rank": 1.0}, {"rank": 3.0}]) == {
        "mean_rank": 2.0, "rank_one_fraction": 0.5, "max_rank": 3.0,
    }
    f1 = summarize("f1", [{"f1": v} for v in (0.0, 0.5, 1.0)])
    assert f1["mean_f1"] == 0.5 and f1["median_f1"] == 0.5 and f1["min_f1"] == 0.0
    rows = [
        {"k": 1.0, "tp": 1, "fn": 1, "tn": 8, "fp": 2},
        {"k": 1.0, "tp": 2, "fn": 0, "tn": 10, "fp": 0},
    ]
    sweep = summarize("ksweep", rows)
    assert sweep == {"k": [1.0], "tpr": [0.75], "tnr": [0.9]}
    with pytest.raises(ValueError):
        summarize("bogus", rows)


@pytest.fixture(scope="module")
def f1_report():
    return f1_experiment(1, replications=2, seed=4, **SMALL)


def test_f1_report_outputs(f1_report):
    assert len(f1_report.records) == 2
    assert f1_report.mean_f1 == pytest.approx(np.mean([r["f1"] for r in f1_report.records]))
    data = json.loads(f1_report.to_json())
    assert data["summary"]["mean_f1"] == f1_report.mean_f1
    assert data["settings"]["k"] == 1.8
    rows = list(csv.DictReader(io.StringIO(f1_report.to_csv())))
    assert [float(r["f1"]) for r in rows] == [r["f1"] for r in f1_report.records]
    with pytest.raises(AttributeError):
        f1_report.nonexistent


def test_experiments_are_reproducible_and_thread_invariant(f1_report):
    again = f1_experiment(1, replications=2, seed=4, threads=3, **SMALL)
    assert again.to_csv() == f1_report.to_csv()
    assert again.to_json() == f1_report.to_json()


def test_cache_is_shared_between_experiments():
    cache = {}
    first = f1_experiment(2, replications=2, seed=1, cache=cache, **SMALL)
    assert len(cache) == 2
    depths = [v[0] for v in cache.values()]
    sweep = k_sensitivity_sweep(2, k_values=[1.8], replications=2, seed=1, cache=cache,
                                undersampling=False, **SMALL)
    assert len(cache) == 2 and [v[0] for v in cache.values()] == depths
    assert [r["f1"] for r in sweep.records] == [r["f1"] for r in first.records]


def test_rank_experiment():
    report = rank_experiment(1, replications=2, seed=0, n_inlier=9, grid_size=12)
    for rec in report.records:
        assert rec["outlier_index"] == 9
        assert 1.0 <= rec["rank"] <= 10.0
        assert rec["rank"] == rec["rank_amplitude"]
    phase = rank_experiment(7, replications=1, seed=0, n_inlier=9, grid_size=12)
    assert phase.records[0]["rank"] == phase.records[0]["rank_phase"]


def test_sweep_rates_move_the_right_way():
    report = k_sensitivity_sweep(1, k_values=[0.5, 1.0, 2.0, 4.0], replications=2, seed=2,
                                 undersampling=False, **SMALL)
    assert report.k == [0.5, 1.0, 2.0, 4.0]
    # a longer whisker flags a subset, so TNR cannot fall and TPR cannot rise
    assert np.all(np.diff(report.tnr) >= 0)
    assert np.all(np.diff(report.tpr) <= 0)


def test_undersampling_keys():
    out = undersampling_skewness(grid_sizes=(12,), n=8, seed=0)
    assert list(out) == ["12"] and np.isfinite(out["12"])


@pytest.mark.parametrize("fn", [f1_experiment, rank_experiment])
def test_replications_must_be_positive(fn):
    with pytest.raises(ValueError):
        fn(1, replications=0)


def test_custom_config_is_recorded():
    report = f1_experiment(1, replications=1, config=BoxplotConfig(k=1.5, p=0.9), **SMALL)
    assert report.settings["k"] == 1.5 and report.settings["p"] == 0.9
