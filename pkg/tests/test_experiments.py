import csv
import io
import math
from dataclasses import replace

import pytest

from jamsched.experiments import (
    CSV_HEADER,
    ReplicateRecord,
    Scenario,
    Strategy,
    SweepSpec,
    replicate_instance,
    run_sweep,
    summarize,
)
from jamsched.solvers import GAConfig, solve_fcfs, solve_ga, solve_stf
from jamsched.taskgen import GenRanges, child_seed

TINY_GA = GAConfig(population_size=30, max_generations=15)


def tiny(**kw):
    base = dict(sjnr_db_points=(4.0, 20.0), replicates=3, ga=TINY_GA, base_seed=11)
    base.update(kw)
    return SweepSpec(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(replicates=0)
    with pytest.raises(ValueError):
        SweepSpec(strategies=())
    with pytest.raises(ValueError):
        SweepSpec(strategies=("fcfs", "fcfs"))
    with pytest.raises(ValueError):
        SweepSpec(scenario="rb", rb_points=(0, 1))
    with pytest.raises(ValueError):
        SweepSpec(strategies=("lifo",))


def test_point_setting():
    s = SweepSpec(fixed_rb=7, fixed_sjnr_db=3.0)
    assert s.point_setting(12) == (12.0, 7)
    r = SweepSpec(scenario=Scenario.RB, fixed_sjnr_db=3.0)
    assert r.point_setting(4) == (3.0, 4)
    assert r.points == tuple(range(1, 16))


def test_single_replicate_row_equals_single_evaluation():
    spec = tiny(sjnr_db_points=(20.0,), replicates=1, strategies=("stf",))
    res = run_sweep(spec)
    ev = solve_stf(replicate_instance(spec, 20.0, 0)).evaluation
    row = res.row(20.0, "stf")
    assert row.drop_ratio_mean == ev.drop_ratio
    assert row.bw_util_mean == ev.bw_utilization
    assert row.objective_mean == ev.objective
    assert row.drop_ratio_se == 0.0
    assert row.replicates == 1 and row.excluded == 0


def test_records_are_paired_across_strategies_and_points():
    spec = tiny()
    res = run_sweep(spec)
    for rep in range(spec.replicates):
        a = replicate_instance(spec, 4.0, rep)
        b = replicate_instance(spec, 20.0, rep)
        # same task set, only the channel moves
        assert a.tasks == b.tasks
    for r in res.records:
        inst = replicate_instance(spec, r.sweep_value, r.replicate)
        if r.strategy is Strategy.FCFS:
            assert r.drop_ratio == solve_fcfs(inst).evaluation.drop_ratio
        assert r.validated


def test_ga_strategies_share_seed():
    spec_a = tiny(strategies=("proposed", "proposed-ntd"))
    spec_b = tiny(strategies=("proposed-ntd", "proposed"))
    ra, rb = run_sweep(spec_a), run_sweep(spec_b)
    for v in spec_a.points:
        for s in ("proposed", "proposed-ntd"):
            assert ra.row(v, s) == rb.row(v, s)


def test_proposed_matches_direct_ga_call():
    spec = tiny(sjnr_db_points=(20.0,), replicates=2, strategies=("proposed",))
    res = run_sweep(spec)
    for rec in res.records:
        inst = replicate_instance(spec, rec.sweep_value, rec.replicate)
        ga = solve_ga(inst, replace(TINY_GA, seed=child_seed(spec.base_seed, rec.replicate, 0, 1)))
        assert rec.objective == ga.evaluation.objective


def test_csv_header_and_shape():
    spec = tiny()
    text = run_sweep(spec).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[0] == ["scenario", "sweep_value", "strategy", "drop_ratio_mean", "drop_ratio_se",
                       "bw_util_mean", "bw_util_se", "objective_mean", "objective_se", "replicates", "excluded"]
    assert len(rows) == 1 + len(spec.points) * len(spec.strategies)
    assert [r[2] for r in rows[1:5]] == ["proposed", "proposed-ntd", "fcfs", "stf"]
    assert rows[1][0] == "sjnr" and rows[1][1] == "4"


def test_deterministic_and_worker_independent():
    spec = tiny()
    a = run_sweep(spec).to_csv()
    b = run_sweep(spec).to_csv()
    c = run_sweep(spec, workers=2).to_csv()
    assert a == b == c
    assert run_sweep(tiny(base_seed=12)).to_csv() != a


def test_infeasible_replicates_excluded_and_counted():
    ranges = GenRanges(m=1, m_queued=2, deadline_ms=(1.0, 2.0), load_cycles=(2e7, 3e7))
    spec = tiny(ranges=ranges, strategies=("fcfs", "stf"), sjnr_db_points=(10.0,))
    res = run_sweep(spec)
    row = res.row(10.0, "fcfs")
    assert row.excluded == spec.replicates and row.replicates == 0
    assert math.isnan(row.drop_ratio_mean)
    assert res.infeasible_ratio == 1.0
    assert not any(r.silent_violation() for r in res.records)
    assert "nan" in res.to_csv()


def test_silent_violation_detection():
    ok = ReplicateRecord(1.0, 0, Strategy.FCFS, 0.1, 0.1, 0.1, True)
    named = ReplicateRecord(1.0, 0, Strategy.FCFS, 0.1, 0.1, 0.1, False, ("queued_on_time",))
    unnamed = ReplicateRecord(1.0, 0, Strategy.FCFS, 0.1, 0.1, 0.1, False, ("position_unique",))
    mismatch = ReplicateRecord(1.0, 0, Strategy.FCFS, 0.1, 0.1, 0.1, True, (), validated=False)
    assert [r.silent_violation() for r in (ok, named, unnamed, mismatch)] == [False, False, True, True]


def test_paired_difference():
    spec = tiny(strategies=("fcfs", "stf"))
    res = run_sweep(spec)
    d, se, n = res.paired(20.0, "fcfs", "stf")
    diffs = []
    for rep in range(spec.replicates):
        inst = replicate_instance(spec, 20.0, rep)
        diffs.append(solve_fcfs(inst).evaluation.drop_ratio - solve_stf(inst).evaluation.drop_ratio)
    assert n == spec.replicates
    assert d == pytest.approx(sum(diffs) / len(diffs), abs=1e-15)
    assert se >= 0.0


def test_summarize_groups_ties_and_ranks():
    # at 0 dB no arrival decodes, so every strategy drops exactly the arrivals
    spec = tiny(sjnr_db_points=(0.0, 24.0))
    rep = summarize(run_sweep(spec))
    low = rep.at(0.0)
    assert len(low.groups) == 1 and set(low.groups[0]) == set(Strategy)
    assert all(m == pytest.approx(5 / 8) for m in low.means.values())
    high = rep.at(24.0)
    assert high.ranking[0] in (Strategy.PROPOSED, Strategy.PROPOSED_NTD)
    for better, worse, d, se in high.gaps:
        assert high.means[better] < high.means[worse]
        assert d > 0 and se >= 0
    text = rep.to_text()
    assert text.startswith("scenario=sjnr") and "tie:" in text


def test_summarize_needs_two_strategies():
    res = run_sweep(tiny(strategies=("fcfs",)))
    with pytest.raises(ValueError):
        summarize(res)


def test_rb_scenario_rows():
    spec = SweepSpec(scenario="rb", rb_points=(1, 3), replicates=2, strategies=("fcfs", "stf"), base_seed=3)
    res = run_sweep(spec)
    assert [r.sweep_value for r in res.rows] == [1, 1, 3, 3]
    assert res.to_csv().splitlines()[1].startswith("rb,1,fcfs,")


def test_high_sjnr_td_and_ntd_close():
    spec = SweepSpec(sjnr_db_points=(30.0,), replicates=10, strategies=("proposed", "proposed-ntd"),
                     ga=GAConfig.reduced(), base_seed=5)
    res = run_sweep(spec)
    gap = res.row(30.0, "proposed").drop_ratio_mean - res.row(30.0, "proposed-ntd").drop_ratio_mean
    assert abs(gap) < 0.05
