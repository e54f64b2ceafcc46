"""Batch experiment runner and metrics reporting.

Wraps the hierarchical rollout into per-episode metrics (inspection
percentage, simulated time, per-agent action and fuel tallies) and per-mode
mean/stddev aggregates, with stable CSV / JSON-lines exports for downstream
plotting.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field

import numpy as np

from .envs import NUM_AGENTS, EnvConfig
from .mpc import ControllerConfig, EpisodeRecord, HierarchicalEngine
from .policies import make_policy

__all__ = [
    "PolicySpec",
    "EpisodeMetrics",
    "BatchReport",
    "run_episode",
    "run_batch",
    "export",
    "METRICS_CSV_SCHEMA",
    "SERIES_CSV_SCHEMA",
]

METRICS_CSV_SCHEMA = "orbitinspect-batch-v1"
SERIES_CSV_SCHEMA = "orbitinspect-series-v1"


@dataclass(frozen=True)
class PolicySpec:
    """Which high-level policy runs on each agent."""

    kind: str = "greedy"
    epsilon: float = 0.0
    weight_paths: tuple | None = None  # one container per agent for recurrent-q

    def __post_init__(self):
        if self.kind == "recurrent-q":
            if not self.weight_paths or len(self.weight_paths) != NUM_AGENTS:
                raise ValueError(
                    f"recurrent-q needs {NUM_AGENTS} weight paths (independent policies)")

    def factory(self, seed: int):
        def build(engine, agent_index: int):
            path = self.weight_paths[agent_index] if self.weight_paths else None
            return make_policy(self.kind, engine, seed=seed + 1000 * agent_index,
                               weights_path=path, epsilon=self.epsilon)

        return build


@dataclass
class EpisodeMetrics:
    """Rollout metrics mirroring the mean-metrics table structure."""

    inspection_pct: float
    sim_time: float
    actions_unique: list
    actions_total: list
    delta_v_per_agent: list
    delta_v_total: float
    done_reason: str
    failures: int

    @classmethod
    def from_record(cls, record: EpisodeRecord) -> "EpisodeMetrics":
        s = record.summary
        per = s["per_agent"]
        return cls(
            inspection_pct=s["inspection_pct"],
            sim_time=s["sim_time"],
            actions_unique=[a["actions_unique"] for a in per],
            actions_total=[a["actions_total"] for a in per],
            delta_v_per_agent=[a["delta_v"] for a in per],
            delta_v_total=s["total_delta_v"],
            done_reason=s["done_reason"],
            failures=sum(a["failures"] for a in per),
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_std(values) -> tuple[float, float]:
    vals = list(values)
    mean = statistics.fmean(vals)
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return mean, std


@dataclass
class BatchReport:
    """Per-mode aggregates over seeded rollouts."""

    config_fingerprint: str
    policy_kind: str
    rollout_threshold: float
    seeds: list
    per_mode: dict = field(default_factory=dict)  # mode -> {"runs": n, "metrics": {...}}

    def to_dict(self) -> dict:
        return {
            "config_fingerprint": self.config_fingerprint,
            "policy_kind": self.policy_kind,
            "rollout_threshold": self.rollout_threshold,
            "seeds": list(self.seeds),
            "per_mode": self.per_mode,
        }


def run_episode(env_config: EnvConfig, controller_config: ControllerConfig,
                policy_spec: PolicySpec, seed: int, rollout_threshold: float = 0.83,
                max_actions_per_agent: int = 100,
                record_ticks: bool = True) -> tuple[EpisodeRecord, EpisodeMetrics]:
    """One seeded hierarchical episode plus its metrics."""
    engine = HierarchicalEngine(env_config, controller_config,
                                rollout_threshold=rollout_threshold,
                                max_actions_per_agent=max_actions_per_agent)
    record = engine.run(policy_spec.factory(seed), seed, record_ticks=record_ticks)
    return record, EpisodeMetrics.from_record(record)


def run_batch(env_config: EnvConfig, controller_config: ControllerConfig,
              policy_spec: PolicySpec, modes, runs_per_mode: int,
              seeds=None, rollout_threshold: float = 0.83,
              max_actions_per_agent: int = 100) -> BatchReport:
    """Aggregate metrics per dynamic mode over a seed list.

    Deterministic given the seed list; episodes that error are tallied as
    failures in the report instead of aborting the batch.
    """
    if seeds is None:
        seeds = list(range(runs_per_mode))
    seeds = list(seeds)
    if len(seeds) != runs_per_mode:
        raise ValueError("need exactly one seed per run")
    report = BatchReport(config_fingerprint=env_config.fingerprint(),
                         policy_kind=policy_spec.kind,
                         rollout_threshold=rollout_threshold,
                         seeds=seeds)
    for mode in modes:
        mode_cfg = env_config.with_overrides(dynamic_mode=mode)
        episode_metrics = []
        errors = []
        for seed in seeds:
            try:
                _, metrics = run_episode(mode_cfg, controller_config, policy_spec,
                                         seed, rollout_threshold=rollout_threshold,
                                         max_actions_per_agent=max_actions_per_agent,
                                         record_ticks=False)
                episode_metrics.append(metrics)
            except Exception as err:  # partial-failure reporting
                errors.append({"seed": seed, "error": f"{type(err).__name__}: {err}"})
        stats: dict = {}
        if episode_metrics:
            stats["inspection_pct"] = _mean_std(m.inspection_pct for m in episode_metrics)
            stats["time_s"] = _mean_std(m.sim_time for m in episode_metrics)
            stats["delta_v_total"] = _mean_std(m.delta_v_total for m in episode_metrics)
            stats["per_agent"] = [
                {
                    "actions_unique": _mean_std(m.actions_unique[i] for m in episode_metrics),
                    "actions_total": _mean_std(m.actions_total[i] for m in episode_metrics),
                    "delta_v": _mean_std(m.delta_v_per_agent[i] for m in episode_metrics),
                }
                for i in range(NUM_AGENTS)
            ]
            stats["coverage_success_rate"] = statistics.fmean(
                1.0 if m.done_reason == "coverage" else 0.0 for m in episode_metrics)
        mode_key = mode.value if hasattr(mode, "value") else str(mode)
        report.per_mode[mode_key] = {
            "runs": len(episode_metrics),
            "errors": errors,
            "metrics": stats,
        }
    return report


def _write_report_csv(report: BatchReport, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={METRICS_CSV_SCHEMA} fingerprint={report.config_fingerprint} "
                 f"policy={report.policy_kind} threshold={report.rollout_threshold}\n")
        cols = ["mode", "runs", "coverage_success_rate",
                "inspection_pct_mean", "inspection_pct_std",
                "time_s_mean", "time_s_std",
                "delta_v_total_mean", "delta_v_total_std"]
        for i in range(NUM_AGENTS):
            cols += [f"a{i}_actions_unique_mean", f"a{i}_actions_total_mean",
                     f"a{i}_delta_v_mean"]
        writer = csv.writer(fh)
        writer.writerow(cols)
        for mode, entry in report.per_mode.items():
            m = entry["metrics"]
            if not m:
                writer.writerow([mode, 0] + [""] * (len(cols) - 2))
                continue
            row = [mode, entry["runs"], m["coverage_success_rate"],
                   m["inspection_pct"][0], m["inspection_pct"][1],
                   m["time_s"][0], m["time_s"][1],
                   m["delta_v_total"][0], m["delta_v_total"][1]]
            for agent in m["per_agent"]:
                row += [agent["actions_unique"][0], agent["actions_total"][0],
                        agent["delta_v"][0]]
            writer.writerow(row)


def _write_series_csv(record: EpisodeRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={SERIES_CSV_SCHEMA} seed={record.meta['seed']} "
                 f"fingerprint={record.meta['config_fingerprint']}\n")
        writer = csv.writer(fh)
        writer.writerow(["time_s", "inspection_pct", "cumulative_delta_v", "transfers"])
        for row in record.series():
            writer.writerow([row["time"], row["inspection_pct"],
                             row["cumulative_delta_v"], row["transfers"]])


def export(obj, fmt: str, path) -> None:
    """Write a BatchReport or EpisodeRecord as ``csv`` or ``json-lines``."""
    if fmt not in ("csv", "json-lines"):
        raise ValueError(f"unknown export format {fmt!r}")
    if isinstance(obj, BatchReport):
        if fmt == "csv":
            _write_report_csv(obj, path)
        else:
            with open(path, "w") as fh:
                for mode, entry in obj.per_mode.items():
                    fh.write(json.dumps({"mode": mode,
                                         "fingerprint": obj.config_fingerprint,
                                         **entry}) + "\n")
    elif isinstance(obj, EpisodeRecord):
        if fmt == "csv":
            _write_series_csv(obj, path)
        else:
            obj.to_jsonl(path)
    else:
        raise TypeError(f"cannot export object of type {type(obj).__name__}")
