import math

import mpmath as mp
import numpy as np
import pytest

from jamsched.evaluator import evaluate, rb_task_error
from jamsched.model import ProblemInstance, Solution, Task, TaskKind


def make_instance(arrivals=(), queued=(), rb_count=1, gamma=None, gamma_db=None, lam=0.5, **kw):
    """``arrivals`` as (deadline_ms, size_bits, load_cycles); ``queued`` as (deadline_ms, load_cycles)."""
    a = tuple(Task(f"a{k}", TaskKind.ARRIVAL, d, l, b) for k, (d, b, l) in enumerate(arrivals))
    q = tuple(Task(f"q{k}", TaskKind.QUEUED, d, l) for k, (d, l) in enumerate(queued))
    if gamma is None:
        gamma = 10 ** (gamma_db / 10) if gamma_db is not None else 1000.0
    sjnr = np.asarray(gamma, dtype=float)
    if sjnr.ndim == 0:
        sjnr = np.full((len(a), rb_count), float(sjnr))
    return ProblemInstance(a, q, rb_count, sjnr, lam=lam, **kw)


def gamma_for_task_error(p_task: float, bits: int = 1) -> float:
    """Linear SJNR at which one copy of a ``bits``-bit task fails with ``p_task``
    under 16-QAM AWGN, solved with mpmath (independent of the package)."""
    mp.mp.dps = 40
    pe = 1 - mp.mpf(1 - p_task) ** (mp.mpf(1) / bits)
    target = pe / mp.mpf("0.75")
    x = mp.findroot(lambda x: mp.erfc(x / mp.sqrt(2)) / 2 - target, 1.0)
    return float(5 * x ** 2)


@pytest.fixture
def make():
    return make_instance


@pytest.fixture
def single_arrival_090():
    """m=1, m'=0, r_b=10; one copy of the task fails with probability 0.1."""
    g = gamma_for_task_error(0.1, bits=1)
    return make_instance(arrivals=[(1000.0, 1, 1_000_000)], rb_count=10, gamma=g, lam=0.5)


def approx(x, rel=1e-12, abs=1e-12):
    return pytest.approx(x, rel=rel, abs=abs)


def isinf(x):
    return math.isinf(x) and x > 0


def random_solution(inst, rng):
    """Random positions for ~80 % of tasks and random RB owners."""
    n = inst.n_tasks
    ids = [t.id for t in inst.tasks]
    slots = rng.permutation(n) + 1
    keep = rng.random(n) < 0.8
    positions = {ids[k]: int(slots[k]) for k in range(n) if keep[k]}
    owners = tuple(
        None if inst.m == 0 or rng.random() < 0.2 else f"a{rng.integers(inst.m)}" for _ in range(inst.rb_count)
    )
    return Solution(positions, owners)


def monte_carlo_drops(inst, sol, samples, rng):
    """Sample each RB copy's failure independently and count dropped tasks."""
    ev = evaluate(inst, sol)
    drops = np.full(samples, float(inst.n_tasks))
    for i, task in enumerate(inst.tasks):
        te = ev.per_task[task.id]
        if not te.sched_ind:
            continue
        if not task.is_arrival:
            drops -= 1
            continue
        rbs = sol.rbs_of(task.id)
        p_copy = np.array([rb_task_error(inst, i, j) for j in rbs])
        fails = rng.random((samples, len(rbs))) < p_copy
        drops -= ~fails.all(axis=1)
    return ev.expected_drops, drops


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
