import csv
import math

import matplotlib.image as mpimg
import numpy as np
import pytest

from zcradar.harness import (DetectionRateTable, binomial_sigma, emit_results, read_results,
                             run_trial, score, sweep, worker_count)
from zcradar.canceller import DetectionReport
from zcradar.rdmap import Detection
from zcradar.scene import Echo, Receiver, Scenario, Target, Transmitter, load_scenario


def strong_scene():
    tgt = Target(np.array([0.0, 2000.0, 1500.0]), np.array([0.0, -300.0, 0.0]))
    return Scenario([Transmitter(np.array([-4000.0, 0, 0]), 1),
                     Transmitter(np.array([4000.0, 0, 0]), 3)],
                    [Receiver(np.array([0.0, -3000.0, 0]))], [tgt])


def det(tx, l, d):
    return Detection(tx, l, d, 0j, 1.0)


def test_score_tolerance_is_cyclic():
    echoes = [Echo(0, 0, 0, -1 / 16384, 1.0), Echo(1, 0, 100, 0.0, 1.0)]
    rep = DetectionReport(detections=[(0, det(0, 2047, 0)), (0, det(1, 102, 0))])
    hits = score(rep, echoes, 1, 2, 2048, 8)
    assert hits.tolist() == [[True, False]]


def test_score_requires_matching_tx():
    echoes = [Echo(0, 0, 50, 0.0, 1.0)]
    rep = DetectionReport(detections=[(0, det(1, 50, 0))])
    assert not score(rep, echoes, 1, 2, 2048, 8).any()


def test_noiseless_trial_hits_everything():
    for method in ("raw", "sc_time", "sc_dcft"):
        res = run_trial(strong_scene(), 0, math.inf, method, 0)
        assert res.hits.shape == (1, 2)
        assert res.hits.all()
        assert res.method == method


def test_trial_determinism():
    sc = load_scenario("nearfar")
    a = run_trial(sc, 0, 5.0, "sc-dcft", 11)
    b = run_trial(sc, 0, 5.0, "sc-dcft", 11)
    np.testing.assert_array_equal(a.hits, b.hits)
    assert a.method == "sc_dcft"


def test_buried_in_noise():
    table = sweep(strong_scene(), 0, [-40.0], 30, "sc_dcft", workers=1)
    assert table.rates.max() <= 0.1


def test_single_trial_table():
    table = sweep(load_scenario("nearfar"), 0, [20.0], 1, "raw", workers=1)
    assert set(np.unique(table.rates)) <= {0.0, 1.0}
    assert table.rates.shape == (1, 2, 2)


def test_aggregates_bracket_per_tx_rates():
    table = sweep(load_scenario("nearfar"), 0, [8.0, 12.0], 12, "sc_dcft", workers=1)
    for si in range(2):
        for q in range(2):
            assert table.all_rates[si, q] <= table.rates[si, q].min()
            assert table.rates[si, q].max() <= table.any_rates[si, q]
    assert ((0 <= table.rates) & (table.rates <= 1)).all()
    np.testing.assert_array_equal(table.rates * table.trials, table.hit_counts)


def test_sweep_reuses_seeds_and_is_deterministic():
    sc = load_scenario("nearfar")
    a = sweep(sc, 0, [10.0], 6, "sc_time", base_seed=100, workers=1)
    b = sweep(sc, 0, [10.0], 6, "sc_time", base_seed=100, workers=1)
    np.testing.assert_array_equal(a.hit_counts, b.hit_counts)
    hits = sum(run_trial(sc, 0, 10.0, "sc_time", 100 + t).hits.astype(int) for t in range(6))
    np.testing.assert_array_equal(a.hit_counts[0], hits)


def test_parallel_matches_serial():
    sc = load_scenario("nearfar")
    serial = sweep(sc, 0, [6.0, 14.0], 4, "sc_dcft", workers=1)
    parallel = sweep(sc, 0, [6.0, 14.0], 4, "sc_dcft", workers=2)
    np.testing.assert_array_equal(serial.hit_counts, parallel.hit_counts)
    np.testing.assert_array_equal(serial.all_counts, parallel.all_counts)


def test_worker_cap(monkeypatch):
    monkeypatch.setenv("ZCRADAR_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.delenv("ZCRADAR_THREADS")
    assert worker_count() >= 1


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        sweep(strong_scene(), 0, [0.0], 0, "raw")


def test_csv_roundtrip_and_plot(tmp_path):
    table = sweep(load_scenario("nearfar"), 0, [10.0, 20.0], 3, "sc_dcft", workers=1)
    out, png = tmp_path / "rates.csv", tmp_path / "rates.png"
    emit_results(table, out, png)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["snr_db", "target", "tx", "rate"]
    assert len(rows) == 1 + 2 * 2 * (2 + 2)
    parsed = read_results(out)
    for si, snr in enumerate(table.snr_grid):
        for q in range(2):
            for i in range(2):
                assert parsed[(snr, q + 1, i + 1)] == table.rates[si, q, i]
            assert parsed[(snr, q + 1, "any")] == table.any_rates[si, q]
            assert parsed[(snr, q + 1, "all")] == table.all_rates[si, q]
    assert png.stat().st_size > 0
    img = mpimg.imread(png)
    assert img.ndim == 3 and img.shape[0] > 100


def test_empty_table_writes_header_only(tmp_path):
    table = DetectionRateTable(np.array([]), np.zeros((0, 2, 2), int), np.zeros((0, 2), int),
                               np.zeros((0, 2), int), trials=1)
    out = tmp_path / "empty.csv"
    emit_results(table, out)
    assert out.read_text().splitlines() == ["snr_db,target,tx,rate"]
    assert read_results(out) == {}


def test_binomial_sigma():
    assert binomial_sigma(0.5, 100) == pytest.approx(0.05)
    assert binomial_sigma(0.0, 10) == 0.0
