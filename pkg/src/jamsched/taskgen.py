"""Random problem instances with uniformly drawn task parameters.

Sizes are in bits with 1 KB taken as 8000 bits, so the default 1-10 KB range
is 8000-80000 bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import db_to_linear
from .model import ProblemInstance, Task, TaskKind

BITS_PER_KB = 8000


@dataclass(frozen=True)
class GenRanges:
    deadline_ms: tuple[float, float] = (140.0, 200.0)
    size_bits: tuple[int, int] = (1 * BITS_PER_KB, 10 * BITS_PER_KB)
    load_cycles: tuple[int, int] = (2_000_000, 50_000_000)
    m: int = 5
    m_queued: int = 3
    poisson_m: bool = False

    def __post_init__(self):
        for name in ("deadline_ms", "size_bits", "load_cycles"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: min {lo} exceeds max {hi}")
        if self.deadline_ms[0] <= 0 or self.size_bits[0] < 1 or self.load_cycles[0] < 1:
            raise ValueError("range lower bounds must keep tasks valid")
        if self.m < 0 or self.m_queued < 0:
            raise ValueError("task counts must be non-negative")


def child_seed(base_seed: int, *path: int) -> int:
    """Deterministic 64-bit seed for a replicate addressed by ``path``."""
    return int(np.random.SeedSequence([base_seed, *path]).generate_state(1, np.uint64)[0])


def _draw_tasks(rng, ranges: GenRanges, count: int, kind: TaskKind, prefix: str):
    d = rng.uniform(*ranges.deadline_ms, size=count)
    b = rng.integers(ranges.size_bits[0], ranges.size_bits[1], size=count, endpoint=True)
    l = rng.integers(ranges.load_cycles[0], ranges.load_cycles[1], size=count, endpoint=True)
    return tuple(
        Task(
            id=f"{prefix}{k}",
            kind=kind,
            deadline_ms=float(d[k]),
            load_cycles=int(l[k]),
            size_bits=int(b[k]) if kind is TaskKind.ARRIVAL else 0,
        )
        for k in range(count)
    )


def generate_sjnr_matrix(gamma_db_per_rb: Sequence[float], m: int) -> np.ndarray:
    row = np.array([db_to_linear(g) for g in gamma_db_per_rb], dtype=float)
    return np.tile(row, (m, 1)).reshape(m, len(row))


def generate_instance(
    ranges: GenRanges,
    gamma_db: float,
    rb_count: int,
    seed: int,
    *,
    lam: float = 0.5,
    rb_bandwidth_hz: float = 1e5,
    cpu_hz: float = 1e9,
    ber_model: str = "awgn",
) -> ProblemInstance:
    if rb_count < 1:
        raise ValueError("rb_count must be >= 1")
    rng = np.random.default_rng(seed)
    m = int(rng.poisson(ranges.m)) if ranges.poisson_m else ranges.m
    arrivals = _draw_tasks(rng, ranges, m, TaskKind.ARRIVAL, "a")
    queued = _draw_tasks(rng, ranges, ranges.m_queued, TaskKind.QUEUED, "q")
    return ProblemInstance(
        arrivals=arrivals,
        queued=queued,
        rb_count=rb_count,
        sjnr=generate_sjnr_matrix([gamma_db] * rb_count, m),
        rb_bandwidth_hz=rb_bandwidth_hz,
        cpu_hz=cpu_hz,
        lam=lam,
        ber_model=ber_model,
    )
