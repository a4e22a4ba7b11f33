"""Genetic algorithm over joint queue order and RB ownership.

Individuals are integer gene arrays (see :mod:`.encoding`), so position
uniqueness and RB exclusivity hold by construction. The remaining rule, that
every queued task finishes before its deadline, is handled by repair (missing
queued tasks are put back into free positions) followed by a penalty per late
queued task.

Each generation draws from its own generator seeded by ``(seed, generation)``,
and the whole population is evaluated in one vectorised call, so runs are
bit-reproducible from the seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..evaluator import evaluate_batch, tables
from ..model import ProblemInstance
from .baselines import fcfs_solution, stf_solution
from .encoding import HOLE, decode, dedupe, encode
from .result import SolveResult, TracePoint, finish


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 2000
    max_generations: int = 500
    function_tolerance: float = 1e-30
    stall_generations: int = 50
    crossover_rate: float = 0.8
    mutation_rate: float = 0.05
    elitism_count: int = 2
    penalty_weight: float = 1e3
    seed: int = 0
    allow_diversity: bool = True

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ValueError("generation counts must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        if self.penalty_weight <= 0:
            raise ValueError("penalty_weight must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def reduced(cls, **kw) -> "GAConfig":
        """Desk-scale budget used by default in sweeps."""
        return cls(population_size=200, max_generations=100, **kw)


def _rng(seed: int, generation: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, generation]))


def _repair(order, rb, m, n, rng, allow_diversity):
    order = dedupe(order, n)
    present = (order[:, :, None] == np.arange(m, n)).any(axis=1)  # (P, m')
    missing = ~present
    if missing.any():
        # random free slot for each missing queued task, missing tasks in random order
        hole_key = np.where(order == HOLE, rng.random(order.shape), np.inf)
        hole_rank = np.argsort(np.argsort(hole_key, axis=1), axis=1)
        miss_key = np.where(missing, rng.random(missing.shape), np.inf)
        miss_sorted = np.argsort(miss_key, axis=1) + m
        n_missing = missing.sum(axis=1)
        fill = hole_rank < n_missing[:, None]
        ranks = np.minimum(hole_rank, missing.shape[1] - 1)
        candidates = np.take_along_axis(miss_sorted, ranks, axis=1)
        order = np.where(fill, candidates, order)
    if not allow_diversity:
        rb = dedupe(rb, m)
    return order, rb


def _mutate_order(order, rate, n, rng):
    order = order.copy()
    C = order.shape[0]
    rows = np.arange(C)
    for pos in range(n):
        hit = rng.random(C) < rate
        new = rng.integers(HOLE, n, C)
        if not hit.any():
            continue
        r = rows[hit]
        v = new[hit]
        cur = order[r, pos].copy()
        match = order[r] == v[:, None]
        found = match.any(axis=1) & (v != HOLE)
        other = match.argmax(axis=1)
        order[r, pos] = v
        # value already elsewhere in the row: swap it into place
        order[r[found], other[found]] = cur[found]
    return order


def _initial_population(inst, cfg, rng):
    P, n, m, r = cfg.population_size, inst.n_tasks, inst.m, inst.rb_count
    order = np.argsort(rng.random((P, n)), axis=1)
    drop = (order < m) & (rng.random((P, n)) < 0.3)
    order = np.where(drop, HOLE, order)
    rb = rng.integers(HOLE, m, (P, r)) if m else np.full((P, r), HOLE)
    seeds = [
        encode(inst, fcfs_solution(inst)),
        encode(inst, stf_solution(inst)),
        encode(inst, replace(fcfs_solution(inst), queue_position={t.id: q + 1 for q, t in enumerate(inst.queued)},
                             rb_owner=(None,) * r)),
    ]
    for k, ch in enumerate(seeds[:P]):
        order[k] = ch.order_genes
        rb[k] = ch.rb_genes
    return _repair(order, rb, m, n, rng, cfg.allow_diversity)


def solve_ga(inst: ProblemInstance, cfg: GAConfig = GAConfig()) -> SolveResult:
    tab = tables(inst)
    n, m, r = inst.n_tasks, inst.m, inst.rb_count
    P = cfg.population_size

    def fitness(order, rb):
        ev = evaluate_batch(tab, order, rb)
        return ev.objective + cfg.penalty_weight * ev.queued_late

    order, rb = _initial_population(inst, cfg, _rng(cfg.seed, 0))
    fit = fitness(order, rb)
    trace = [TracePoint(0, float(fit.min()), float(fit.mean()))]
    n_children = P - cfg.elitism_count

    for gen in range(1, cfg.max_generations + 1):
        rng = _rng(cfg.seed, gen)
        rank = np.argsort(fit, kind="stable")
        elite = rank[: cfg.elitism_count]

        contenders = rng.integers(0, P, (n_children, 2, 2))
        a, b = contenders[..., 0], contenders[..., 1]
        parents = np.where(fit[a] <= fit[b], a, b)
        p1, p2 = parents[:, 0], parents[:, 1]

        cross = rng.random(n_children) < cfg.crossover_rate
        take_o = cross[:, None] & (rng.random((n_children, n)) < 0.5)
        take_r = cross[:, None] & (rng.random((n_children, r)) < 0.5)
        c_order = np.where(take_o, order[p2], order[p1])
        c_rb = np.where(take_r, rb[p2], rb[p1])

        c_order = _mutate_order(c_order, cfg.mutation_rate, n, rng)
        hit = rng.random(c_rb.shape) < cfg.mutation_rate
        c_rb = np.where(hit, rng.integers(HOLE, m, c_rb.shape) if m else HOLE, c_rb)
        c_order, c_rb = _repair(c_order, c_rb, m, n, rng, cfg.allow_diversity)

        order = np.concatenate([order[elite], c_order])
        rb = np.concatenate([rb[elite], c_rb])
        fit = np.concatenate([fit[elite], fitness(c_order, c_rb)])
        trace.append(TracePoint(gen, float(fit.min()), float(fit.mean())))

        if gen >= cfg.stall_generations:
            gain = trace[gen - cfg.stall_generations].best_fitness - trace[gen].best_fitness
            if gain < cfg.function_tolerance:
                break

    k = int(np.argmin(fit))
    name = "proposed" if cfg.allow_diversity else "proposed-ntd"
    result = finish(name, inst, decode(inst, order[k], rb[k]), trace=tuple(trace))
    if not result.feasible:
        result = replace(result, note="no feasible decision found; returning best-effort solution")
    return result
