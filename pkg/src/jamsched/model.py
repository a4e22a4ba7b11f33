"""Domain types: tasks, problem snapshots, decisions and their evaluations.

Tasks are indexed internally as ``arrivals + queued`` in that order; every
array-valued helper in the package uses this convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Sequence

import numpy as np


class StructuralError(ValueError):
    """A solution or instance that cannot be interpreted at all.

    Distinct from a constraint violation: a violation is a well-formed
    decision that breaks a rule, a structural error is malformed input.
    """


class TaskKind(str, enum.Enum):
    ARRIVAL = "arrival"
    QUEUED = "queued"


@dataclass(frozen=True)
class Task:
    id: str
    kind: TaskKind
    deadline_ms: float
    load_cycles: int
    size_bits: int = 0

    def __post_init__(self):
        if not self.deadline_ms > 0:
            raise StructuralError(f"task {self.id}: deadline_ms must be > 0, got {self.deadline_ms}")
        if self.load_cycles < 1:
            raise StructuralError(f"task {self.id}: load_cycles must be >= 1, got {self.load_cycles}")
        if self.kind is TaskKind.ARRIVAL and self.size_bits < 1:
            raise StructuralError(f"task {self.id}: size_bits must be >= 1 for arrivals, got {self.size_bits}")

    @property
    def is_arrival(self) -> bool:
        return self.kind is TaskKind.ARRIVAL


def _frozen_array(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """One decision snapshot.

    ``sjnr`` is a linear-scale (not dB) matrix of shape ``(m, rb_count)``.
    ``ber_model`` names the bit-error curve used by :mod:`jamsched.channel`.
    """

    arrivals: tuple[Task, ...]
    queued: tuple[Task, ...]
    rb_count: int
    sjnr: np.ndarray
    rb_bandwidth_hz: float = 1e5
    cpu_hz: float = 1e9
    lam: float = 0.5
    modulation_bits_per_symbol: int = 4
    ber_model: str = "awgn"

    def __post_init__(self):
        object.__setattr__(self, "arrivals", tuple(self.arrivals))
        object.__setattr__(self, "queued", tuple(self.queued))
        m = len(self.arrivals)
        if self.rb_count < 1:
            raise StructuralError(f"rb_count must be >= 1, got {self.rb_count}")
        if not 0.0 <= self.lam <= 1.0:
            raise StructuralError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.rb_bandwidth_hz <= 0 or self.cpu_hz <= 0:
            raise StructuralError("rb_bandwidth_hz and cpu_hz must be positive")
        if self.modulation_bits_per_symbol < 1:
            raise StructuralError("modulation_bits_per_symbol must be >= 1")
        sjnr = np.asarray(self.sjnr, dtype=float)
        if m == 0 and sjnr.size == 0:
            sjnr = np.zeros((0, self.rb_count))
        if sjnr.shape != (m, self.rb_count):
            raise StructuralError(f"sjnr must have shape ({m}, {self.rb_count}), got {sjnr.shape}")
        if np.any(~(sjnr > 0)):
            raise StructuralError("sjnr entries must be positive linear ratios")
        object.__setattr__(self, "sjnr", _frozen_array(sjnr))
        for t in self.arrivals:
            if t.kind is not TaskKind.ARRIVAL:
                raise StructuralError(f"task {t.id} listed as arrival but has kind {t.kind.value}")
        for t in self.queued:
            if t.kind is not TaskKind.QUEUED:
                raise StructuralError(f"task {t.id} listed as queued but has kind {t.kind.value}")
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise StructuralError("task ids must be unique within an instance")
        object.__setattr__(self, "_index", MappingProxyType({tid: k for k, tid in enumerate(ids)}))

    @property
    def m(self) -> int:
        return len(self.arrivals)

    @property
    def m_queued(self) -> int:
        return len(self.queued)

    @property
    def n_tasks(self) -> int:
        return len(self.arrivals) + len(self.queued)

    @property
    def tasks(self) -> tuple[Task, ...]:
        return self.arrivals + self.queued

    def index_of(self, task_id: str) -> int:
        try:
            return self._index[task_id]
        except KeyError:
            raise StructuralError(f"unknown task id {task_id!r}") from None

    def task(self, task_id: str) -> Task:
        return self.tasks[self.index_of(task_id)]


@dataclass(frozen=True)
class Solution:
    """Queue positions (1-based; absent means unscheduled) and RB owners."""

    queue_position: Mapping[str, int] = field(default_factory=dict)
    rb_owner: tuple[Optional[str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "queue_position", MappingProxyType(dict(self.queue_position)))
        object.__setattr__(self, "rb_owner", tuple(self.rb_owner))

    @classmethod
    def empty(cls, inst: ProblemInstance) -> "Solution":
        return cls({}, (None,) * inst.rb_count)

    def rbs_of(self, task_id: str) -> list[int]:
        return [j for j, owner in enumerate(self.rb_owner) if owner == task_id]

    def to_dict(self) -> dict:
        return {"queue_position": dict(self.queue_position), "rb_owner": list(self.rb_owner)}


def check_structure(inst: ProblemInstance, sol: Solution) -> None:
    """Raise :class:`StructuralError` unless ``sol`` can be read against ``inst``."""
    n = inst.n_tasks
    for tid, q in sol.queue_position.items():
        inst.index_of(tid)
        if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
            raise StructuralError(f"position of {tid!r} must be an integer, got {q!r}")
        if not 1 <= q <= n:
            raise StructuralError(f"position of {tid!r} must lie in 1..{n}, got {q}")
    if len(sol.rb_owner) != inst.rb_count:
        raise StructuralError(f"rb_owner must have length {inst.rb_count}, got {len(sol.rb_owner)}")
    for owner in sol.rb_owner:
        if owner is not None:
            inst.index_of(owner)


def to_dense(inst: ProblemInstance, sol: Solution) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(X, Y)``: X is ``(n, n)`` task-by-position, Y is ``(m, rb_count)``.

    Queued task ids in ``rb_owner`` cannot be expressed in Y and raise.
    """
    check_structure(inst, sol)
    X = np.zeros((inst.n_tasks, inst.n_tasks), dtype=np.int8)
    for tid, q in sol.queue_position.items():
        X[inst.index_of(tid), q - 1] = 1
    Y = np.zeros((inst.m, inst.rb_count), dtype=np.int8)
    for j, owner in enumerate(sol.rb_owner):
        if owner is None:
            continue
        i = inst.index_of(owner)
        if i >= inst.m:
            raise StructuralError(f"queued task {owner!r} cannot own an RB in the dense form")
        Y[i, j] = 1
    return X, Y


def from_dense(inst: ProblemInstance, X: np.ndarray, Y: np.ndarray) -> Solution:
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != (inst.n_tasks, inst.n_tasks) or Y.shape != (inst.m, inst.rb_count):
        raise StructuralError("dense matrices do not match the instance dimensions")
    if np.any(X.sum(axis=1) > 1) or np.any(Y.sum(axis=0) > 1):
        raise StructuralError("a task holds two positions or an RB has two owners")
    ids = [t.id for t in inst.tasks]
    positions = {ids[i]: int(q) + 1 for i, q in zip(*np.nonzero(X))}
    owners: list[Optional[str]] = [None] * inst.rb_count
    for i, j in zip(*np.nonzero(Y)):
        owners[j] = ids[i]
    return Solution(positions, tuple(owners))


class Constraint(str, enum.Enum):
    POSITION_UNIQUE = "position_unique"
    RB_EXCLUSIVE = "rb_exclusive"
    QUEUED_ON_TIME = "queued_on_time"


@dataclass(frozen=True)
class Violation:
    constraint: Constraint
    task_id: Optional[str]
    detail: str = ""

    def __str__(self):
        who = f" [{self.task_id}]" if self.task_id is not None else ""
        return f"{self.constraint.value}{who}: {self.detail}"


@dataclass(frozen=True)
class TaskEval:
    queue_pos: int
    completion_ms: float
    sched_ind: int
    dec_ind: float
    comm_ms: float
    comp_ms: float
    rate_bps: float
    td_error: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Evaluation:
    per_task: Mapping[str, TaskEval]
    expected_drops: float
    drop_ratio: float
    bw_utilization: float
    objective: float
    feasible: bool
    violations: tuple[Violation, ...] = ()

    def to_dict(self) -> dict:
        return {
            "per_task": {tid: te.to_dict() for tid, te in self.per_task.items()},
            "expected_drops": self.expected_drops,
            "drop_ratio": self.drop_ratio,
            "bw_utilization": self.bw_utilization,
            "objective": self.objective,
            "feasible": self.feasible,
            "violations": [str(v) for v in self.violations],
        }


def make_tasks(kind: TaskKind, rows: Sequence[dict], prefix: str) -> tuple[Task, ...]:
    """Build tasks from plain dicts, assigning ``prefix<k>`` ids when missing."""
    out = []
    for k, row in enumerate(rows):
        out.append(
            Task(
                id=str(row.get("id", f"{prefix}{k}")),
                kind=kind,
                deadline_ms=float(row["deadline_ms"]),
                load_cycles=int(row["load_cycles"]),
                size_bits=int(row.get("size_bits", 0)),
            )
        )
    return tuple(out)
