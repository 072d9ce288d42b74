from __future__ import annotations

import csv
import math

import numpy as np
import pytest

from specpert import mc
from specpert.errors import InputError, NotMonotoneError


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


class TestDriver:
    def test_same_seed_same_records(self):
        a = mc.run_variance(40, [0.1, 0.3], trials=4, base_seed=9, workers=1)
        b = mc.run_variance(40, [0.1, 0.3], trials=4, base_seed=9, workers=1)
        assert list(a.record_rows()) == list(b.record_rows())
        assert a.summary == b.summary

    def test_worker_count_does_not_change_results(self):
        a = mc.run_variance(40, [0.1, 0.3], trials=6, base_seed=2, workers=1)
        b = mc.run_variance(40, [0.1, 0.3], trials=6, base_seed=2, workers=3)
        assert list(a.record_rows()) == list(b.record_rows())

    def test_different_seed_changes_records(self):
        a = mc.run_variance(40, [0.2], trials=3, base_seed=0, workers=1)
        b = mc.run_variance(40, [0.2], trials=3, base_seed=1, workers=1)
        assert list(a.record_rows()) != list(b.record_rows())

    def test_cells_share_trial_seeds(self):
        res = mc.run_variance(30, [0.1, 0.2], trials=3, workers=1)
        seeds = {}
        for rec in res.records:
            seeds.setdefault(rec.trial, set()).add(rec.seed)
        assert all(len(s) == 1 for s in seeds.values())

    def test_validation(self):
        with pytest.raises(InputError):
            mc.run_experiment(mc.ExperimentConfig("nope", [{"n": 5}], 1))
        with pytest.raises(InputError):
            mc.run_experiment(mc.ExperimentConfig("variance", [{"n": 5, "p": 0.1}], 0))
        with pytest.raises(InputError):
            mc.run_experiment(mc.ExperimentConfig("variance", [], 1))
        with pytest.raises(InputError):
            mc.run_variance(10, [0.7], trials=1)
        with pytest.raises(InputError):
            mc.run_phase(10, [(1.0, 2.0)], trials=1)
        with pytest.raises(NotMonotoneError):
            mc.run_btsbm(2, 4, [(1.0, 5.0, 2.0)], trials=1)

    def test_cell_id(self):
        assert mc.cell_id({"n": 800, "p": 0.1}) == "n=800;p=0.1"
        assert mc.cell_id({"d": 2, "a": (40.0, 20.0, 5.0)}) == "d=2;a=40.0/20.0/5.0"

    def test_log_log_slope(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        assert mc.log_log_slope(x, 3 * x**-0.5) == pytest.approx(-0.5)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


class TestExperiments:
    def test_variance_vanishes_without_edges(self):
        res = mc.run_variance(30, [0.0], trials=5, workers=1)
        summary = res.summary["n=30;p=0.0"]
        assert summary["var_opnorm"] == 0.0 and summary["mean_opnorm"] == 0.0
        assert math.isnan(summary["var_over_p"])

    def test_tail_frequencies(self):
        res = mc.run_tail(60, 0.2, trials=40, workers=1)
        summary = next(iter(res.summary.values()))
        assert summary["freq_t=0.0"] == 1.0
        freqs = [summary[f"freq_t={t!r}"] for t in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)]
        assert all(a >= b for a, b in zip(freqs, freqs[1:]))

    def test_phase_summary(self):
        res = mc.run_phase(200, [(30.0, 2.0), (2.5, 2.0)], trials=4, workers=1)
        easy, hard = res.summary.values()
        assert easy["recovery_rate"] == 1.0 and easy["mean_misclustering"] == 0.0
        assert hard["recovery_rate"] == 0.0

    def test_bound_ratio_complete_graph(self):
        config = mc.ExperimentConfig("bound_ratio", [{"n": 50, "p": 1.0}], trials=2, workers=1)
        res = mc.run_experiment(config)
        for rec in res.records:
            assert rec.values["d2inf"] < 1e-12
            assert rec.values["ratio"] < 1e-10

    def test_bound_ratio_fields(self):
        res = mc.run_bound_ratio([300], trials=3, workers=1)
        summary = next(iter(res.summary.values()))
        assert summary["np"] == pytest.approx(10 * math.log(300))
        assert 0.0 <= summary["frac_ratio_le_1"] <= 1.0
        assert summary["bound"] > 0

    def test_btsbm_depth_one(self):
        res = mc.run_btsbm(1, 100, [(20.0, 2.0)], trials=3, workers=1)
        summary = next(iter(res.summary.values()))
        assert summary["rate_layer_1"] == 1.0
        assert summary["rate_layer_2"] == 1.0
        assert summary["full_tree_rate"] == 1.0
        assert summary["condition_layer_2"] == 1.0 and summary["leaves_impossible"] == 0.0


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


class TestOutput:
    def test_files_and_headers(self, tmp_path):
        out = tmp_path / "var.csv"
        mc.run_variance(20, [0.1], trials=2, workers=1, out=str(out))
        rows = read_csv(out)
        assert tuple(rows[0]) == mc.RECORD_HEADER
        assert len(rows) == 1 + 2
        summary = read_csv(tmp_path / "var_summary.csv")
        assert tuple(summary[0]) == mc.SUMMARY_HEADER
        assert {r[2] for r in summary[1:]} == {"mean_opnorm", "var_opnorm", "var_over_p", "trials"}

    def test_rerun_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        mc.run_variance(20, [0.1], trials=3, workers=1, out=str(a))
        mc.run_variance(20, [0.1], trials=3, workers=2, out=str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_values_round_trip(self, tmp_path):
        out = tmp_path / "r.csv"
        res = mc.run_variance(20, [0.1], trials=2, workers=1, out=str(out))
        rows = read_csv(out)[1:]
        for rec, row in zip(res.records, rows):
            assert float(row[5]) == rec.values["opnorm"]
