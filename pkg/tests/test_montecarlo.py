import math

import pytest

from exactstop.montecarlo import CSV_COLUMNS, measure_success_rate, predicted_success, results_to_csv
from exactstop.stopping import ConsensusCounts, true_success_rate


def test_all_inlier_population_always_succeeds():
    for mode in ("approximate", "exact"):
        res = measure_success_rate(10, 10, 3, 0.9, mode, 100, seed=1)
        assert res.success_rate == 1.0
        assert res.iterations == 1


def test_approximate_matches_prediction_small():
    res = measure_success_rate(20, 6, 5, 0.99, "approximate", 5000, seed=2)
    assert res.iterations == 1893
    assert abs(res.success_rate - res.s_true_predicted) <= 3 * res.predicted_std_error
    assert res.s_true_predicted == pytest.approx(true_success_rate(ConsensusCounts(20, 6, 5), 0.99), abs=1e-4)


def test_exact_reaches_target_small():
    res = measure_success_rate(20, 8, 3, 0.9, "exact", 5000, seed=3)
    assert res.s_true_predicted >= 0.9
    assert res.success_rate >= 0.9 - 3 * math.sqrt(0.9 * 0.1 / 5000)


def test_single_draw_rate_matches_exact_probability():
    # with s chosen so that N = 1, the success rate is the all-inlier probability itself
    n_iter, pred = predicted_success(ConsensusCounts(10, 6, 2), 0.2, "exact")
    assert n_iter == 1
    assert pred == pytest.approx(15 / 45)
    res = measure_success_rate(10, 6, 2, 0.2, "exact", 40_000, seed=4)
    assert abs(res.success_rate - 1 / 3) <= 3 * math.sqrt(2 / 9 / 40_000)


def test_thread_count_does_not_change_result():
    one = measure_success_rate(30, 9, 3, 0.95, "approximate", 4500, seed=7, threads=1)
    four = measure_success_rate(30, 9, 3, 0.95, "approximate", 4500, seed=7, threads=4)
    assert one == four


def test_preconditions():
    with pytest.raises(ValueError):
        measure_success_rate(20, 3, 5, 0.99, "exact", 100)
    with pytest.raises(ValueError):
        measure_success_rate(20, 6, 5, 0.99, "exact", 0)


def test_csv_schema():
    res = measure_success_rate(10, 10, 3, 0.9, "exact", 100)
    header, row = results_to_csv([res]).strip().split("\n")
    assert tuple(header.split(",")) == CSV_COLUMNS
    assert row.startswith("10,10,3,0.9,exact,100,1.0,0.0,1.0")
