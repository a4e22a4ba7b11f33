"""Fitness of a joint scheduling / RB-allocation decision.

Two routes compute the same quantities: :func:`evaluate` walks the
definitions task by task on a :class:`~jamsched.model.Solution`, and
:func:`evaluate_batch` computes the aggregates for a whole population of
integer-encoded decisions with numpy. The second exists for the GA and the
exhaustive oracle; tests hold the two together.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from . import channel
from .model import (
    Constraint,
    Evaluation,
    ProblemInstance,
    Solution,
    StructuralError,
    TaskEval,
    Violation,
    check_structure,
)


def queue_position(sol: Solution, task_id: str) -> int:
    return int(sol.queue_position.get(task_id, 0))


def processing_time_ms(load_cycles: float, cpu_hz: float) -> float:
    if not cpu_hz > 0:
        raise ValueError("cpu_hz must be > 0")
    return load_cycles / cpu_hz * 1e3


def shannon_rate_bps(gamma: float, bandwidth_hz: float) -> float:
    return bandwidth_hz * math.log2(1.0 + gamma)


def tx_rate_bps(inst: ProblemInstance, sol: Solution, arrival_task_id: str) -> float:
    i = inst.index_of(arrival_task_id)
    if i >= inst.m:
        raise ValueError(f"{arrival_task_id!r} is a queued task; it has no uplink rate")
    rates = [shannon_rate_bps(inst.sjnr[i, j], inst.rb_bandwidth_hz) for j in sol.rbs_of(arrival_task_id)]
    return max(rates, default=0.0)


def comm_latency_ms(size_bits: int, rate_bps: float) -> float:
    if rate_bps <= 0:
        return math.inf
    return size_bits / rate_bps * 1e3


def comp_latency_ms(inst: ProblemInstance, sol: Solution, task_id: str) -> float:
    """Processing time of every task queued at or before ``task_id``'s position."""
    q = queue_position(sol, task_id)
    if q == 0:
        raise ValueError(f"{task_id!r} is unscheduled; its computing delay is undefined")
    total = 0.0
    for other, q_other in sol.queue_position.items():
        if q_other <= q:
            total += processing_time_ms(inst.task(other).load_cycles, inst.cpu_hz)
    return total


def completion_time_ms(inst: ProblemInstance, sol: Solution, task_id: str) -> float:
    cmp_ms = comp_latency_ms(inst, sol, task_id)
    task = inst.task(task_id)
    if not task.is_arrival:
        return cmp_ms
    return cmp_ms + comm_latency_ms(task.size_bits, tx_rate_bps(inst, sol, task_id))


def sched_indicator(t_c: float, deadline: float, q: int) -> int:
    return int(q != 0 and t_c < deadline)


def rb_task_error(inst: ProblemInstance, i: int, j: int) -> float:
    """Error probability of arrival ``i`` sent once on RB ``j``."""
    pe = channel.bit_error_prob(inst.sjnr[i, j], inst.modulation_bits_per_symbol, inst.ber_model)
    return channel.task_error_prob(pe, inst.arrivals[i].size_bits)


def td_error(inst: ProblemInstance, sol: Solution, task_id: str) -> float:
    i = inst.index_of(task_id)
    if i >= inst.m:
        return 0.0
    return channel.td_error_prob(rb_task_error(inst, i, j) for j in sol.rbs_of(task_id))


def dec_indicator(inst: ProblemInstance, sol: Solution, task_id: str) -> float:
    return 1.0 - td_error(inst, sol, task_id)


def _per_task(inst: ProblemInstance, sol: Solution) -> dict[str, TaskEval]:
    out = {}
    for task in inst.tasks:
        q = queue_position(sol, task.id)
        if task.is_arrival:
            rate = tx_rate_bps(inst, sol, task.id)
            comm = comm_latency_ms(task.size_bits, rate)
            p_td = td_error(inst, sol, task.id)
        else:
            rate, comm, p_td = 0.0, 0.0, 0.0
        if q:
            cmp_ms = comp_latency_ms(inst, sol, task.id)
            t_c = cmp_ms + comm
        else:
            cmp_ms, t_c = math.nan, math.inf
        out[task.id] = TaskEval(
            queue_pos=q,
            completion_ms=t_c,
            sched_ind=sched_indicator(t_c, task.deadline_ms, q),
            dec_ind=1.0 - p_td,
            comm_ms=comm,
            comp_ms=cmp_ms,
            rate_bps=rate,
            td_error=p_td,
        )
    return out


def _violations(inst: ProblemInstance, sol: Solution, per_task: dict[str, TaskEval]) -> list[Violation]:
    found = []
    holder: dict[int, str] = {}
    for tid, q in sol.queue_position.items():
        if q in holder:
            found.append(Violation(Constraint.POSITION_UNIQUE, tid, f"position {q} already held by {holder[q]}"))
        else:
            holder[q] = tid
    for j, owner in enumerate(sol.rb_owner):
        if owner is not None and not inst.task(owner).is_arrival:
            found.append(Violation(Constraint.RB_EXCLUSIVE, owner, f"RB {j} owned by a queued task"))
    for task in inst.queued:
        te = per_task[task.id]
        if not te.sched_ind:
            why = "unscheduled" if te.queue_pos == 0 else f"completes at {te.completion_ms:.3f} ms >= deadline"
            found.append(Violation(Constraint.QUEUED_ON_TIME, task.id, why))
    return found


def validate_solution(inst: ProblemInstance, sol: Solution) -> list[Violation]:
    """Constraint violations of ``sol``; empty means feasible.

    Raises :class:`StructuralError` for unknown ids or malformed fields.
    """
    check_structure(inst, sol)
    return _violations(inst, sol, _per_task(inst, sol))


def evaluate(inst: ProblemInstance, sol: Solution) -> Evaluation:
    check_structure(inst, sol)
    per_task = _per_task(inst, sol)
    n = inst.n_tasks
    success = sum(te.sched_ind * te.dec_ind for te in per_task.values())
    expected_drops = n - success
    drop_ratio = expected_drops / n if n else 0.0
    used = 0.0
    for task in inst.arrivals:
        te = per_task[task.id]
        used += len(sol.rbs_of(task.id)) * te.dec_ind * te.sched_ind
    bw = used / inst.rb_count
    violations = _violations(inst, sol, per_task)
    return Evaluation(
        per_task=per_task,
        expected_drops=expected_drops,
        drop_ratio=drop_ratio,
        bw_utilization=bw,
        objective=inst.lam * drop_ratio + (1.0 - inst.lam) * bw,
        feasible=not violations,
        violations=tuple(violations),
    )


# vectorised route ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InstanceTables:
    """Per-instance constants in task-index order (arrivals first)."""

    n: int
    m: int
    rb_count: int
    lam: float
    tp_ms: np.ndarray       # (n,)
    deadline_ms: np.ndarray  # (n,)
    size_bits: np.ndarray   # (m,)
    rate_bps: np.ndarray    # (m, rb_count)
    rb_error: np.ndarray    # (m, rb_count), single-copy task error


_TABLES: "weakref.WeakKeyDictionary[ProblemInstance, InstanceTables]" = weakref.WeakKeyDictionary()


def tables(inst: ProblemInstance) -> InstanceTables:
    cached = _TABLES.get(inst)
    if cached is not None:
        return cached
    m, r = inst.m, inst.rb_count
    rate = np.empty((m, r))
    err = np.empty((m, r))
    for i in range(m):
        for j in range(r):
            rate[i, j] = shannon_rate_bps(inst.sjnr[i, j], inst.rb_bandwidth_hz)
            err[i, j] = rb_task_error(inst, i, j)
    tab = InstanceTables(
        n=inst.n_tasks,
        m=m,
        rb_count=r,
        lam=inst.lam,
        tp_ms=np.array([processing_time_ms(t.load_cycles, inst.cpu_hz) for t in inst.tasks]),
        deadline_ms=np.array([t.deadline_ms for t in inst.tasks]),
        size_bits=np.array([t.size_bits for t in inst.arrivals], dtype=float),
        rate_bps=rate,
        rb_error=err,
    )
    _TABLES[inst] = tab
    return tab


@dataclass
class BatchEval:
    expected_drops: np.ndarray
    drop_ratio: np.ndarray
    bw_utilization: np.ndarray
    objective: np.ndarray
    queued_late: np.ndarray  # count of queued tasks not scheduled on time
    sched: np.ndarray        # (P, n) bool
    dec: np.ndarray          # (P, n) float


def evaluate_batch(tab: InstanceTables, order: np.ndarray, rb: np.ndarray) -> BatchEval:
    """Evaluate ``P`` encoded decisions at once.

    ``order[p, q]`` is the task index at position ``q + 1`` or -1 for a hole;
    ``rb[p, j]`` is the arrival index owning RB ``j`` or -1. Each task index
    must appear at most once per row of ``order``.
    """
    order = np.asarray(order, dtype=np.int64)
    rb = np.asarray(rb, dtype=np.int64)
    P = order.shape[0]
    n, m = tab.n, tab.m
    if order.shape[1] != n or rb.shape[1] != tab.rb_count:
        raise StructuralError("encoded population does not match instance dimensions")
    task_ids = np.arange(n)
    at = order[:, :, None] == task_ids  # (P, pos, task)
    tp_pos = np.where(order >= 0, tab.tp_ms[np.clip(order, 0, None)], 0.0)
    cum = np.cumsum(tp_pos, axis=1)
    scheduled = at.any(axis=1)
    cmp_ms = np.where(at, cum[:, :, None], 0.0).sum(axis=1)

    own = rb[:, :, None] == np.arange(m)  # (P, rb, arrival)
    n_rb = own.sum(axis=1)
    p_td = np.where(own, tab.rb_error.T[None], 1.0).prod(axis=1)
    rate = np.where(own, tab.rate_bps.T[None], 0.0).max(axis=1, initial=0.0)
    with np.errstate(divide="ignore"):
        comm = np.where(rate > 0, tab.size_bits / np.where(rate > 0, rate, 1.0) * 1e3, np.inf)

    t_c = cmp_ms.copy()
    t_c[:, :m] += comm
    sched = scheduled & (t_c < tab.deadline_ms)
    dec = np.ones((P, n))
    dec[:, :m] = 1.0 - p_td
    success = (sched * dec).sum(axis=1)
    drops = n - success
    drop_ratio = drops / n if n else np.zeros(P)
    bw = (n_rb * dec[:, :m] * sched[:, :m]).sum(axis=1) / tab.rb_count
    queued_late = (~sched[:, m:]).sum(axis=1)
    return BatchEval(
        expected_drops=drops,
        drop_ratio=drop_ratio,
        bw_utilization=bw,
        objective=tab.lam * drop_ratio + (1.0 - tab.lam) * bw,
        queued_late=queued_late,
        sched=sched,
        dec=dec,
    )
