"""Metrics: micro rates, paired NavEff bootstrap, depth slope, hard subset,
and the hierarchical serializer comparison."""

from __future__ import annotations

import itertools
import random

import pytest

from gridprobe.harness import EvalRecord
from gridprobe.metrics import (
    NavEffect,
    depth_slope,
    hallucination_rate,
    hard_subset,
    nav_effect,
    serializer_comparison,
)

_counter = itertools.count()


def rec(verdict, **kw):
    defaults = dict(
        run_id="r",
        model_id="m",
        trajectory_id="t",
        probe_id=f"p{next(_counter)}",
        protocol="ctrlstatic",
        serializer="grid",
        category="P",
        question="q",
        model_output="ANSWER: x",
        verdict=verdict,
        latency=0.0,
        quintile=1,
        level_id="lvl",
        seed=0,
    )
    defaults.update(kw)
    return EvalRecord(**defaults)


def batch(n_hall, n_corr, n_unparse=0, n_transport=0, **kw):
    out = [rec("hallucinated", **kw) for _ in range(n_hall)]
    out += [rec("correct", **kw) for _ in range(n_corr)]
    out += [rec("unparseable", **kw) for _ in range(n_unparse)]
    out += [rec("transport_failure", **kw) for _ in range(n_transport)]
    return out


# ---------------------------------------------------------------------------
# micro rates


def test_rate_is_micro_averaged_and_excludes_ungraded():
    records = batch(3, 7, n_unparse=2, n_transport=1)
    table = hallucination_rate(records)
    group = table[()]
    assert group.rate == pytest.approx(0.3)
    assert group.graded == 10
    assert group.unparseable == 2 and group.transport_failure == 1


def test_micro_average_pools_raw_counts_across_groups():
    # 1/10 on one level and 9/10 on another pool to 10/20, not mean(10%, 90%)
    records = batch(1, 9, level_id="a") + batch(9, 1, level_id="b")
    table = hallucination_rate(records)
    assert table[()].rate == pytest.approx(0.5)
    by_level = hallucination_rate(records, group_by=("level",))
    assert by_level[("a",)].rate == pytest.approx(0.1)
    assert by_level[("b",)].rate == pytest.approx(0.9)


def test_group_with_no_graded_records_is_absent_not_zero():
    records = batch(0, 0, n_unparse=3, model_id="mute") + batch(1, 1, model_id="ok")
    table = hallucination_rate(records, group_by=("model",))
    assert ("mute",) not in table
    assert ("ok",) in table


# ---------------------------------------------------------------------------
# NavEff


def paired_records(rate_innav: float, rate_ctrl: float, n: int, episode="t", seed=0):
    """n probes per protocol, identical probe ids, exact pooled rates."""
    h_in, h_ctrl = round(rate_innav * n), round(rate_ctrl * n)
    assert abs(h_in - rate_innav * n) < 1e-9 and abs(h_ctrl - rate_ctrl * n) < 1e-9
    records = []
    for i in range(n):
        for protocol, h in (("innav", h_in), ("ctrlstatic", h_ctrl)):
            records.append(
                rec(
                    "hallucinated" if i < h else "correct",
                    probe_id=f"{episode}_q{i}",
                    protocol=protocol,
                    trajectory_id=episode,
                    seed=seed,
                )
            )
    return records


def test_nav_effect_point_estimate_and_pairing():
    records = paired_records(0.30, 0.10, n=10, episode="a") + paired_records(
        0.50, 0.30, n=10, episode="b"
    )
    ne = nav_effect(records, draws=200)
    assert ne.rate_innav == pytest.approx(40.0)
    assert ne.rate_ctrlstatic == pytest.approx(20.0)
    assert ne.naveff == pytest.approx(20.0)
    assert ne.ci_low <= ne.naveff <= ne.ci_high


def test_nav_effect_published_golden_row():
    # exact pooled rates 27.44% / 40.68% display as 27.4 / 40.7 at one decimal
    # and give NavEff -13.24, i.e. -13.2 at the same reporting precision
    records = paired_records(0.2744, 0.4068, n=2500)
    ne = nav_effect(records, draws=50)
    assert f"{ne.rate_innav:.1f}" == "27.4"
    assert f"{ne.rate_ctrlstatic:.1f}" == "40.7"
    assert abs(round(ne.naveff, 1) - (-13.2)) < 1e-9


def test_nav_effect_bootstrap_is_seeded_and_reproducible():
    records = paired_records(0.4, 0.2, n=10, episode="a") + paired_records(
        0.6, 0.1, n=10, episode="b"
    )
    a = nav_effect(records, draws=500)
    b = nav_effect(records, draws=500)
    assert (a.ci_low, a.ci_high) == (b.ci_low, b.ci_high)


def test_nav_effect_significance_flag():
    wide = NavEffect(naveff=1.0, rate_innav=0, rate_ctrlstatic=0, ci_low=-2, ci_high=4)
    tight = NavEffect(naveff=5.0, rate_innav=0, rate_ctrlstatic=0, ci_low=2, ci_high=8)
    assert not wide.significant and tight.significant


def test_nav_effect_rejects_unpaired_designs():
    only_one = batch(1, 1, protocol="innav")
    with pytest.raises(ValueError):
        nav_effect(only_one, draws=10)
    mismatched = paired_records(0.5, 0.5, n=2)
    mismatched.append(rec("correct", protocol="innav", probe_id="extra"))
    with pytest.raises(ValueError, match="probe sets differ"):
        nav_effect(mismatched, draws=10)


# ---------------------------------------------------------------------------
# depth slope


def test_depth_slope_exact_linear():
    records = []
    for q, h in zip(range(1, 6), (2, 3, 4, 5, 6)):  # 10%..30% over 20 each
        records += batch(h, 20 - h, quintile=q)
    assert abs(depth_slope(records) - 5.0) < 1e-9


def test_depth_slope_needs_two_quintiles():
    with pytest.raises(ValueError):
        depth_slope(batch(1, 1, quintile=3))


# ---------------------------------------------------------------------------
# hard subset


def brute_force_hard_subset(table, model_threshold=5, rate_threshold=0.20):
    pairs = {(lvl, ser) for _, lvl, ser in table}
    out = []
    for pair in pairs:
        n = sum(
            1
            for (m, lvl, ser), rate in table.items()
            if (lvl, ser) == pair and rate >= rate_threshold
        )
        if n >= model_threshold:
            out.append(pair)
    return sorted(out)


def test_hard_subset_matches_brute_force_on_random_tables():
    rng = random.Random(11)
    models = [f"m{i}" for i in range(7)]
    levels = ["l1", "l2", "l3"]
    serializers = ["symbolic", "grid", "memory"]
    for _ in range(25):
        table = {
            (m, l, s): rng.random()
            for m in models
            for l in levels
            for s in serializers
        }
        assert hard_subset(table) == brute_force_hard_subset(table)


def test_hard_subset_requires_enough_models():
    table = {("m1", "l", "grid"): 0.9, ("m2", "l", "grid"): 0.9}
    with pytest.raises(ValueError, match=">= 5 models"):
        hard_subset(table)


# ---------------------------------------------------------------------------
# serializer comparison


def test_serializer_comparison_weights_each_trace_equally():
    """Simpson-style case: the unweighted per-seed mean must decide, not the
    pooled probe counts (which would flip the winner)."""
    records = []
    # symbolic: a tiny clean trace and a large noisy one -> mean 25%, pool ~49.5%
    records += batch(0, 1, serializer="symbolic", level_id="w", seed=1)
    records += batch(50, 50, serializer="symbolic", level_id="w", seed=2)
    # grid: steady 30% on both seeds -> mean 30%, pool ~30%
    records += batch(30, 70, serializer="grid", level_id="w", seed=1)
    records += batch(3, 7, serializer="grid", level_id="w", seed=2)
    result = serializer_comparison(records)
    comp = result["w"]
    assert comp.world_rates["symbolic"] == pytest.approx(0.25)
    assert comp.world_rates["grid"] == pytest.approx(0.30)
    assert comp.winner == "symbolic"
    assert comp.margin == pytest.approx(0.05)


def test_serializer_comparison_skips_single_serializer_worlds():
    records = batch(1, 9, serializer="grid", level_id="only")
    assert "only" not in serializer_comparison(records)
