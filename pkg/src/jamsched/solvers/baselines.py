"""FCFS and shortest-task-first baselines.

Queued tasks keep the head of the queue in their current order so that the
server's earlier commitments are honoured whenever that order allows. Each
served arrival gets one RB, first fit, until RBs run out.
"""

from __future__ import annotations

from typing import Sequence

from ..model import ProblemInstance, Solution, Task
from .result import SolveResult, finish


def _queue_then_rbs(inst: ProblemInstance, arrivals: Sequence[Task]) -> Solution:
    positions = {t.id: q + 1 for q, t in enumerate(inst.queued)}
    base = len(inst.queued)
    owners: list = [None] * inst.rb_count
    for k, t in enumerate(arrivals):
        positions[t.id] = base + k + 1
        if k < inst.rb_count:
            owners[k] = t.id
    return Solution(positions, tuple(owners))


def fcfs_solution(inst: ProblemInstance) -> Solution:
    return _queue_then_rbs(inst, inst.arrivals)


def stf_solution(inst: ProblemInstance) -> Solution:
    # load order equals processing-time order; arrival index breaks ties
    ranked = sorted(enumerate(inst.arrivals), key=lambda kt: (kt[1].load_cycles, kt[0]))
    return _queue_then_rbs(inst, [t for _, t in ranked])


def solve_fcfs(inst: ProblemInstance) -> SolveResult:
    return finish("fcfs", inst, fcfs_solution(inst))


def solve_stf(inst: ProblemInstance) -> SolveResult:
    return finish("stf", inst, stf_solution(inst))
