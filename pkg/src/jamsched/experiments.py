"""SJNR and RB-count sweeps with seeded replication.

At a given replicate every sweep point and every strategy sees the same task
set (only the SJNR or RB count changes), so comparisons across strategies and
across adjacent sweep points are paired.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .evaluator import validate_solution
from .model import Constraint
from .solvers import GAConfig, solve_fcfs, solve_ga, solve_stf
from .taskgen import GenRanges, child_seed, generate_instance

CSV_HEADER = (
    "scenario", "sweep_value", "strategy",
    "drop_ratio_mean", "drop_ratio_se",
    "bw_util_mean", "bw_util_se",
    "objective_mean", "objective_se",
    "replicates", "excluded",
)


class Scenario(str, enum.Enum):
    SJNR = "sjnr"
    RB = "rb"


class Strategy(str, enum.Enum):
    PROPOSED = "proposed"
    PROPOSED_NTD = "proposed-ntd"
    FCFS = "fcfs"
    STF = "stf"


ALL_STRATEGIES = tuple(Strategy)


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario = Scenario.SJNR
    sjnr_db_points: tuple[float, ...] = tuple(range(0, 31, 2))
    rb_points: tuple[int, ...] = tuple(range(1, 16))
    fixed_rb: int = 10
    fixed_sjnr_db: float = 5.0
    replicates: int = 300
    strategies: tuple[Strategy, ...] = ALL_STRATEGIES
    lam: float = 0.5
    base_seed: int = 0
    ranges: GenRanges = field(default_factory=GenRanges)
    ga: GAConfig = field(default_factory=GAConfig.reduced)
    rb_bandwidth_hz: float = 1e5
    cpu_hz: float = 1e9
    ber_model: str = "awgn"

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.points:
            raise ValueError("sweep points must be non-empty")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("strategies must not repeat")
        if any(r < 1 for r in self.rb_points) or self.fixed_rb < 1:
            raise ValueError("RB counts must be >= 1")

    @property
    def points(self) -> tuple:
        return self.sjnr_db_points if self.scenario is Scenario.SJNR else self.rb_points

    def point_setting(self, value) -> tuple[float, int]:
        """(gamma_db, rb_count) at one sweep point."""
        if self.scenario is Scenario.SJNR:
            return float(value), self.fixed_rb
        return self.fixed_sjnr_db, int(value)


@dataclass(frozen=True)
class ReplicateRecord:
    sweep_value: float
    replicate: int
    strategy: Strategy
    drop_ratio: float
    bw_utilization: float
    objective: float
    feasible: bool
    violations: tuple[str, ...] = ()
    # independent re-validation agreed with the solver's own report
    validated: bool = True

    def silent_violation(self) -> bool:
        """Reported feasibility disagrees with re-validation, or the run is
        infeasible without the queued-deadline rule being named."""
        if not self.validated:
            return True
        return not self.feasible and Constraint.QUEUED_ON_TIME.value not in self.violations


@dataclass(frozen=True)
class SweepRow:
    scenario: Scenario
    sweep_value: float
    strategy: Strategy
    drop_ratio_mean: float
    drop_ratio_se: float
    bw_util_mean: float
    bw_util_se: float
    objective_mean: float
    objective_se: float
    replicates: int
    excluded: int


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]
    records: tuple[ReplicateRecord, ...]

    def row(self, sweep_value, strategy) -> SweepRow:
        strategy = Strategy(strategy)
        for r in self.rows:
            if r.sweep_value == sweep_value and r.strategy is strategy:
                return r
        raise KeyError((sweep_value, strategy))

    def series(self, strategy, metric: str = "drop_ratio_mean") -> list[float]:
        return [getattr(self.row(v, strategy), metric) for v in self.spec.points]

    @property
    def infeasible_ratio(self) -> float:
        return sum(not r.feasible for r in self.records) / len(self.records)

    def paired(self, sweep_value, a, b, metric: str = "drop_ratio") -> tuple[float, float, int]:
        """Mean and standard error of ``metric(a) - metric(b)`` over replicates
        where both strategies were feasible."""
        a, b = Strategy(a), Strategy(b)
        by = {}
        for r in self.records:
            if r.sweep_value == sweep_value and r.feasible and r.strategy in (a, b):
                by.setdefault(r.replicate, {})[r.strategy] = getattr(r, metric)
        diffs = [d[a] - d[b] for d in by.values() if len(d) == 2]
        return (*_mean_se(diffs), len(diffs))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([
                r.scenario.value, _fmt(r.sweep_value), r.strategy.value,
                _fmt(r.drop_ratio_mean), _fmt(r.drop_ratio_se),
                _fmt(r.bw_util_mean), _fmt(r.bw_util_se),
                _fmt(r.objective_mean), _fmt(r.objective_se),
                r.replicates, r.excluded,
            ])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    mean = float(arr.sum() / len(arr))
    if len(arr) < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(len(arr)))


def replicate_instance(spec: SweepSpec, value, rep: int):
    """The instance every strategy sees at sweep point ``value``, replicate ``rep``."""
    gamma_db, rb_count = spec.point_setting(value)
    return generate_instance(
        spec.ranges, gamma_db, rb_count, child_seed(spec.base_seed, rep),
        lam=spec.lam, rb_bandwidth_hz=spec.rb_bandwidth_hz, cpu_hz=spec.cpu_hz, ber_model=spec.ber_model,
    )


def _run_job(args) -> list[ReplicateRecord]:
    spec, point_idx, value, rep = args
    inst = replicate_instance(spec, value, rep)
    ga_seed = child_seed(spec.base_seed, rep, point_idx, 1)
    out = []
    for strategy in spec.strategies:
        if strategy is Strategy.PROPOSED:
            res = solve_ga(inst, replace(spec.ga, seed=ga_seed, allow_diversity=True))
        elif strategy is Strategy.PROPOSED_NTD:
            res = solve_ga(inst, replace(spec.ga, seed=ga_seed, allow_diversity=False))
        elif strategy is Strategy.FCFS:
            res = solve_fcfs(inst)
        else:
            res = solve_stf(inst)
        ev = res.evaluation
        out.append(ReplicateRecord(
            sweep_value=value,
            replicate=rep,
            strategy=strategy,
            drop_ratio=ev.drop_ratio,
            bw_utilization=ev.bw_utilization,
            objective=ev.objective,
            feasible=ev.feasible,
            violations=tuple(sorted({v.constraint.value for v in ev.violations})),
            validated=validate_solution(inst, res.solution) == list(ev.violations),
        ))
    return out


def run_sweep(spec: SweepSpec, workers: int = 1, progress: Optional[callable] = None) -> SweepResult:
    """Run every (point, replicate) job and aggregate per (point, strategy).

    Infeasible replicates are excluded from that strategy's means and counted
    in ``excluded``. Output does not depend on ``workers``.
    """
    jobs = [(spec, k, v, rep) for k, v in enumerate(spec.points) for rep in range(spec.replicates)]
    records: list[ReplicateRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))):
                records.extend(batch)
                if progress:
                    progress()
    else:
        for job in jobs:
            records.extend(_run_job(job))
            if progress:
                progress()
    return SweepResult(spec, tuple(_aggregate(spec, records)), tuple(records))


def _aggregate(spec: SweepSpec, records: Iterable[ReplicateRecord]) -> list[SweepRow]:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.sweep_value, r.strategy), []).append(r)
    rows = []
    for v in spec.points:
        for s in spec.strategies:
            grp = groups.get((v, s), [])
            ok = [r for r in grp if r.feasible]
            d = _mean_se([r.drop_ratio for r in ok])
            b = _mean_se([r.bw_utilization for r in ok])
            o = _mean_se([r.objective for r in ok])
            rows.append(SweepRow(spec.scenario, v, s, *d, *b, *o, replicates=len(ok), excluded=len(grp) - len(ok)))
    return rows


# summary --------------------------------------------------------------------

TIE_EPS = 1e-12


@dataclass(frozen=True)
class RankedPoint:
    sweep_value: float
    # groups of tied strategies, best (lowest mean drop ratio) first
    groups: tuple[tuple[Strategy, ...], ...]
    means: dict
    # (better, worse, mean difference, paired SE) for each adjacent pair of groups
    gaps: tuple[tuple[Strategy, Strategy, float, float], ...]

    @property
    def ranking(self) -> tuple[Strategy, ...]:
        return tuple(s for g in self.groups for s in g)


@dataclass(frozen=True)
class SummaryReport:
    scenario: Scenario
    points: tuple[RankedPoint, ...]

    def at(self, sweep_value) -> RankedPoint:
        for p in self.points:
            if p.sweep_value == sweep_value:
                return p
        raise KeyError(sweep_value)

    def to_text(self) -> str:
        lines = [f"scenario={self.scenario.value}"]
        for p in self.points:
            parts = []
            for g in p.groups:
                names = " = ".join(f"{s.value}({p.means[s]:.4f})" for s in g)
                parts.append(f"[tie: {names}]" if len(g) > 1 else names)
            gaps = "; ".join(f"{a.value}-{b.value}={d:+.4f}±{se:.4f}" for a, b, d, se in p.gaps)
            lines.append(f"{_fmt(p.sweep_value)}: " + " < ".join(parts) + (f"   ({gaps})" if gaps else ""))
        return "\n".join(lines)


def summarize(result: SweepResult) -> SummaryReport:
    """Per sweep point, rank strategies by mean drop ratio with paired
    standard errors between neighbours. Exact ties are grouped."""
    strategies = result.spec.strategies
    if len(strategies) < 2:
        raise ValueError("summarize needs a result covering at least two strategies")
    points = []
    for v in result.spec.points:
        means = {s: result.row(v, s).drop_ratio_mean for s in strategies}
        ordered = sorted(strategies, key=lambda s: (means[s], strategies.index(s)))
        groups: list[list[Strategy]] = []
        for s in ordered:
            if groups and abs(means[s] - means[groups[-1][0]]) <= TIE_EPS:
                groups[-1].append(s)
            else:
                groups.append([s])
        gaps = []
        for g1, g2 in zip(groups, groups[1:]):
            d, se, _ = result.paired(v, g2[0], g1[0])
            gaps.append((g1[0], g2[0], d, se))
        points.append(RankedPoint(v, tuple(tuple(g) for g in groups), means, tuple(gaps)))
    return SummaryReport(result.spec.scenario, tuple(points))
