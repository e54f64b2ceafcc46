import csv
import json

import numpy as np
import pytest

from orbitinspect.envs import EnvConfig
from orbitinspect.harness import (
    BatchReport,
    EpisodeMetrics,
    PolicySpec,
    export,
    run_batch,
    run_episode,
)
from orbitinspect.mpc import ControllerConfig

CTRL = ControllerConfig()


def fast_config(**overrides):
    base = dict(target_shape="sphere", target_points=300, target_seed=2,
                dynamic_mode="static-hill", fov_half_angle_deg=0.2)
    base.update(overrides)
    return EnvConfig(**base)


SPEC = PolicySpec(kind="greedy")


class TestRunEpisode:
    def test_metrics_consistent_with_record(self):
        record, metrics = run_episode(fast_config(), CTRL, SPEC, seed=1,
                                      rollout_threshold=0.85)
        # Coverage recomputed from the last ledger-bearing event.
        cov_events = [e for e in record.events if e["type"] in ("image", "arrival")]
        assert metrics.inspection_pct == pytest.approx(
            100.0 * cov_events[-1]["coverage"], abs=1e-9)
        # Fuel recomputed from the thrust ticks.
        for i in range(3):
            tick_fuel = sum(np.linalg.norm(t["thrust"]) * CTRL.control_dt
                            for t in record.ticks if t["agent"] == i)
            assert metrics.delta_v_per_agent[i] == pytest.approx(tick_fuel, rel=1e-6)
        assert metrics.delta_v_total == pytest.approx(sum(metrics.delta_v_per_agent))
        assert all(u <= t for u, t in zip(metrics.actions_unique, metrics.actions_total))
        assert all(u <= 20 for u in metrics.actions_unique)

    def test_deterministic_given_seed(self):
        _, m1 = run_episode(fast_config(), CTRL, SPEC, seed=9, rollout_threshold=0.85)
        _, m2 = run_episode(fast_config(), CTRL, SPEC, seed=9, rollout_threshold=0.85)
        assert m1 == m2


class TestRunBatch:
    def test_single_run_mean_equals_episode(self):
        report = run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 1, seeds=[3],
                           rollout_threshold=0.85)
        _, metrics = run_episode(fast_config(), CTRL, SPEC, seed=3,
                                 rollout_threshold=0.85, record_ticks=False)
        entry = report.per_mode["static-hill"]
        assert entry["runs"] == 1
        assert entry["metrics"]["inspection_pct"][0] == pytest.approx(metrics.inspection_pct)
        assert entry["metrics"]["inspection_pct"][1] == 0.0
        assert entry["metrics"]["time_s"][0] == pytest.approx(metrics.sim_time)

    def test_disjoint_seed_lists_reproducible(self):
        r1a = run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 2, seeds=[0, 1],
                        rollout_threshold=0.85)
        r1b = run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 2, seeds=[0, 1],
                        rollout_threshold=0.85)
        r2 = run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 2, seeds=[5, 6],
                       rollout_threshold=0.85)
        assert r1a.to_dict() == r1b.to_dict()
        assert r1a.per_mode != r2.per_mode

    def test_greedy_small_batch_reaches_threshold(self):
        report = run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 3,
                           seeds=[0, 1, 2], rollout_threshold=0.85)
        m = report.per_mode["static-hill"]["metrics"]
        assert m["coverage_success_rate"] == 1.0
        assert m["inspection_pct"][0] >= 85.0

    def test_partial_failure_reported(self):
        # An impossible recurrent-q spec (bad container path) must be recorded
        # per-seed, not abort the batch.
        spec = PolicySpec(kind="recurrent-q", weight_paths=("no.rqw", "no.rqw", "no.rqw"))
        report = run_batch(fast_config(), CTRL, spec, ["static-hill"], 2, seeds=[0, 1])
        entry = report.per_mode["static-hill"]
        assert entry["runs"] == 0
        assert len(entry["errors"]) == 2

    def test_seed_count_validation(self):
        with pytest.raises(ValueError):
            run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 3, seeds=[1, 2])


class TestExport:
    def test_report_csv_round_trip(self, tmp_path):
        report = run_batch(fast_config(), CTRL, SPEC, ["static-hill", "single-axis"],
                           2, seeds=[0, 1], rollout_threshold=0.85)
        path = tmp_path / "report.csv"
        export(report, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# schema=orbitinspect-batch-v1")
        rows = list(csv.DictReader(lines[1:]))
        assert {r["mode"] for r in rows} == {"static-hill", "single-axis"}
        for row in rows:
            entry = report.per_mode[row["mode"]]["metrics"]
            assert float(row["inspection_pct_mean"]) == pytest.approx(
                entry["inspection_pct"][0])
            assert float(row["delta_v_total_mean"]) == pytest.approx(
                entry["delta_v_total"][0])
            assert float(row["a0_actions_unique_mean"]) == pytest.approx(
                entry["per_agent"][0]["actions_unique"][0])

    def test_series_csv_fig5_schema(self, tmp_path):
        record, _ = run_episode(fast_config(), CTRL, SPEC, seed=1,
                                rollout_threshold=0.85)
        path = tmp_path / "series.csv"
        export(record, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# schema=orbitinspect-series-v1")
        rows = list(csv.DictReader(lines[1:]))
        assert list(rows[0]) == ["time_s", "inspection_pct", "cumulative_delta_v",
                                 "transfers"]
        pct = [float(r["inspection_pct"]) for r in rows]
        assert pct == sorted(pct)
        assert pct[-1] >= 85.0
        times = [float(r["time_s"]) for r in rows]
        assert times == sorted(times)

    def test_record_jsonl_one_line_per_step(self, tmp_path):
        record, _ = run_episode(fast_config(), CTRL, SPEC, seed=2,
                                rollout_threshold=0.85)
        path = tmp_path / "episode.jsonl"
        export(record, "json-lines", path)
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        ticks = [l for l in lines if l["type"] == "tick"]
        assert len(ticks) == len(record.ticks)

    def test_report_jsonl(self, tmp_path):
        report = run_batch(fast_config(), CTRL, SPEC, ["static-hill"], 1, seeds=[0],
                           rollout_threshold=0.85)
        path = tmp_path / "report.jsonl"
        export(report, "json-lines", path)
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert lines[0]["mode"] == "static-hill"
        assert lines[0]["fingerprint"] == report.config_fingerprint

    def test_bad_format(self, tmp_path):
        report = BatchReport("x", "greedy", 0.83, [])
        with pytest.raises(ValueError):
            export(report, "parquet", tmp_path / "x")

    def test_policy_spec_validation(self):
        with pytest.raises(ValueError):
            PolicySpec(kind="recurrent-q")
