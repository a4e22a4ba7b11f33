"""Brute-force oracle for small instances.

Queue assignments are enumerated as gap-free sequences: every queued task
plus any subset of arrivals, in every order. Empty positions contribute no
processing time, so a sequence with gaps is never better than its compacted
form and enumerating the compact forms covers every objective value.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..evaluator import evaluate_batch, tables
from ..model import ProblemInstance
from .encoding import HOLE, decode
from .result import SolveResult, finish

DEFAULT_BUDGET = 10_000_000
_CHUNK = 200_000
# any queued deadline miss outranks any objective value (objective <= 1)
_INFEASIBLE = 1e3


class BudgetExceeded(ValueError):
    pass


def _n_orders(m: int, m_queued: int) -> int:
    return sum(math.comb(m, k) * math.factorial(k + m_queued) for k in range(m + 1))


def _n_rb_vectors(m: int, rb_count: int, allow_diversity: bool) -> int:
    if allow_diversity:
        return (m + 1) ** rb_count
    # injective partial maps from RBs to arrivals
    return sum(math.comb(rb_count, k) * math.perm(m, k) for k in range(min(m, rb_count) + 1))


def search_size(inst: ProblemInstance, allow_diversity: bool = True) -> int:
    return _n_orders(inst.m, inst.m_queued) * _n_rb_vectors(inst.m, inst.rb_count, allow_diversity)


def _orders(inst: ProblemInstance) -> np.ndarray:
    n, m = inst.n_tasks, inst.m
    queued = list(range(m, n))
    rows = []
    for k in range(m + 1):
        for subset in itertools.combinations(range(m), k):
            for perm in itertools.permutations(queued + list(subset)):
                rows.append(perm + (HOLE,) * (n - len(perm)))
    rows.sort()
    return np.array(rows, dtype=np.int64).reshape(len(rows), n)


def _rb_vectors(inst: ProblemInstance, allow_diversity: bool) -> np.ndarray:
    vecs = itertools.product(range(HOLE, inst.m), repeat=inst.rb_count)
    if not allow_diversity:
        vecs = (v for v in vecs if len({i for i in v if i != HOLE}) == sum(i != HOLE for i in v))
    return np.array(list(vecs), dtype=np.int64).reshape(-1, inst.rb_count)


def solve_exhaustive(
    inst: ProblemInstance, budget: int = DEFAULT_BUDGET, allow_diversity: bool = True
) -> SolveResult:
    """Exact minimiser; ties go to the lexicographically smallest encoding."""
    size = search_size(inst, allow_diversity)
    if size > budget:
        raise BudgetExceeded(
            f"exhaustive search needs {size} evaluations "
            f"({_n_orders(inst.m, inst.m_queued)} queue orders x "
            f"{_n_rb_vectors(inst.m, inst.rb_count, allow_diversity)} RB vectors), budget is {budget}"
        )
    tab = tables(inst)
    orders = _orders(inst)
    rbs = _rb_vectors(inst, allow_diversity)
    R = len(rbs)
    per_chunk = max(1, _CHUNK // R)
    best = (math.inf, None, None)
    for start in range(0, len(orders), per_chunk):
        block = orders[start:start + per_chunk]
        o = np.repeat(block, R, axis=0)
        r = np.tile(rbs, (len(block), 1))
        ev = evaluate_batch(tab, o, r)
        fit = ev.objective + _INFEASIBLE * ev.queued_late
        k = int(np.argmin(fit))
        if fit[k] < best[0]:
            best = (float(fit[k]), o[k], r[k])
    _, order, rb = best
    return finish("exhaustive", inst, decode(inst, order, rb))
