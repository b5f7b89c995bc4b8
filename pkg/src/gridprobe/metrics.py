"""Metric computation over graded evaluation records.

All rates are micro-averaged: hallucinated / (hallucinated + correct) within
the group. Unparseable and transport-failure records are counted separately
and excluded from the denominator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .harness import EvalRecord

GROUP_FIELDS = {
    "model": "model_id",
    "category": "category",
    "serializer": "serializer",
    "level": "level_id",
    "quintile": "quintile",
    "protocol": "protocol",
    "trajectory": "trajectory_id",
    "seed": "seed",
}

BOOTSTRAP_DRAWS = 10_000
BOOTSTRAP_SEED = 20240817


def _field(record: EvalRecord, name: str):
    return getattr(record, GROUP_FIELDS.get(name, name))


@dataclass
class GroupRate:
    key: tuple
    hallucinated: int
    correct: int
    unparseable: int
    transport_failure: int

    @property
    def graded(self) -> int:
        return self.hallucinated + self.correct

    @property
    def rate(self) -> float:
        return self.hallucinated / self.graded


def hallucination_rate(
    records: Iterable[EvalRecord], group_by: Sequence[str] = ()
) -> dict[tuple, GroupRate]:
    """Rate table keyed by group tuple; groups with no graded records are
    absent, never reported as zero."""
    counts: dict[tuple, dict[str, int]] = {}
    for rec in records:
        key = tuple(_field(rec, g) for g in group_by)
        bucket = counts.setdefault(
            key, {"correct": 0, "hallucinated": 0, "unparseable": 0, "transport_failure": 0}
        )
        bucket[rec.verdict] += 1
    table = {}
    for key, c in counts.items():
        if c["hallucinated"] + c["correct"] == 0:
            continue
        table[key] = GroupRate(
            key=key,
            hallucinated=c["hallucinated"],
            correct=c["correct"],
            unparseable=c["unparseable"],
            transport_failure=c["transport_failure"],
        )
    return table


def _pooled_rate(records: list[EvalRecord]) -> float:
    h = sum(1 for r in records if r.verdict == "hallucinated")
    c = sum(1 for r in records if r.verdict == "correct")
    if h + c == 0:
        raise ValueError("no graded records")
    return h / (h + c)


@dataclass
class NavEffect:
    naveff: float  # percentage points, InNav - CtrlStatic
    rate_innav: float
    rate_ctrlstatic: float
    ci_low: float
    ci_high: float

    @property
    def significant(self) -> bool:
        return not (self.ci_low <= 0.0 <= self.ci_high)


def nav_effect(
    records: Iterable[EvalRecord],
    draws: int = BOOTSTRAP_DRAWS,
    seed: int = BOOTSTRAP_SEED,
) -> NavEffect:
    """NavEff = rate_InNav − rate_CtrlStatic in percentage points, with a 95%
    CI from a paired bootstrap resampling episodes (trajectory × seed)."""
    records = list(records)
    by_protocol: dict[str, dict[tuple, list[EvalRecord]]] = {"innav": {}, "ctrlstatic": {}}
    for rec in records:
        if rec.verdict not in ("correct", "hallucinated"):
            continue
        episode = (rec.trajectory_id, rec.seed)
        by_protocol[rec.protocol].setdefault(episode, []).append(rec)
    episodes = sorted(by_protocol["innav"].keys())
    if not episodes or set(episodes) != set(by_protocol["ctrlstatic"].keys()):
        raise ValueError("nav_effect needs paired records covering both protocols per episode")
    for ep in episodes:
        innav_probes = sorted(r.probe_id for r in by_protocol["innav"][ep])
        ctrl_probes = sorted(r.probe_id for r in by_protocol["ctrlstatic"][ep])
        if innav_probes != ctrl_probes:
            raise ValueError(f"episode {ep}: probe sets differ across protocols")

    def pooled(protocol: str, chosen: Sequence[tuple]) -> float:
        recs = [r for ep in chosen for r in by_protocol[protocol][ep]]
        return _pooled_rate(recs)

    rate_in = pooled("innav", episodes) * 100.0
    rate_ctrl = pooled("ctrlstatic", episodes) * 100.0
    naveff = rate_in - rate_ctrl

    rng = np.random.default_rng(seed)
    n = len(episodes)
    diffs = np.empty(draws)
    for i in range(draws):
        chosen = [episodes[j] for j in rng.integers(0, n, size=n)]
        diffs[i] = (pooled("innav", chosen) - pooled("ctrlstatic", chosen)) * 100.0
    lo, hi = np.percentile(diffs, [2.5, 97.5])
    return NavEffect(
        naveff=naveff,
        rate_innav=rate_in,
        rate_ctrlstatic=rate_ctrl,
        ci_low=float(lo),
        ci_high=float(hi),
    )


def depth_slope(records: Iterable[EvalRecord]) -> float:
    """OLS slope of per-quintile hallucination rate, in percentage points per
    quintile. Requires records spanning at least two quintiles."""
    table = hallucination_rate(records, group_by=("quintile",))
    if len(table) < 2:
        raise ValueError("depth_slope needs records spanning >= 2 quintiles")
    xs = np.array([key[0] for key in sorted(table)], dtype=float)
    ys = np.array([table[key].rate * 100.0 for key in sorted(table)], dtype=float)
    slope, _intercept = np.polyfit(xs, ys, 1)
    return float(slope)


def hard_subset(
    rate_table: dict[tuple, float],
    model_threshold: int = 5,
    rate_threshold: float = 0.20,
) -> list[tuple]:
    """(level, serializer) pairs on which >= model_threshold models reach a
    hallucination rate >= rate_threshold. Input keys: (model, level, serializer)."""
    models = {model for model, _, _ in rate_table}
    if len(models) < model_threshold:
        raise ValueError(
            f"hard_subset needs >= {model_threshold} models, table covers {len(models)}"
        )
    failing: dict[tuple, set] = {}
    for (model, level, serializer), rate in rate_table.items():
        if rate >= rate_threshold:
            failing.setdefault((level, serializer), set()).add(model)
    return sorted(pair for pair, who in failing.items() if len(who) >= model_threshold)


@dataclass
class SerializerComparison:
    world_rates: dict[str, float]  # serializer -> world-level rate
    winner: str
    margin: float  # runner-up rate minus winner rate, >= 0


def serializer_comparison(
    records: Iterable[EvalRecord],
) -> dict[str, SerializerComparison]:
    """Hierarchical aggregation per world (level):

    probes -> trace: pooled rate within each (serializer, level, seed);
    traces -> world: unweighted mean over seeds (each episode weight 1);
    worlds -> comparison: winner is the serializer with the lowest rate.
    """
    trace_table = hallucination_rate(records, group_by=("serializer", "level", "seed"))
    world_acc: dict[str, dict[str, list[float]]] = {}
    for (serializer, level, _seed), group in trace_table.items():
        world_acc.setdefault(level, {}).setdefault(serializer, []).append(group.rate)
    result: dict[str, SerializerComparison] = {}
    for level, per_serializer in world_acc.items():
        if len(per_serializer) < 2:
            continue
        world_rates = {s: float(np.mean(rs)) for s, rs in per_serializer.items()}
        ranked = sorted(world_rates.items(), key=lambda kv: (kv[1], kv[0]))
        winner, best = ranked[0]
        margin = ranked[1][1] - best
        result[level] = SerializerComparison(
            world_rates=world_rates, winner=winner, margin=margin
        )
    return result
