from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..evaluator import evaluate
from ..model import Constraint, Evaluation, ProblemInstance, Solution, Violation


@dataclass(frozen=True)
class TracePoint:
    generation: int
    best_fitness: float
    mean_fitness: float


@dataclass(frozen=True)
class SolveResult:
    """A solver's answer. ``feasible`` False is the explicit infeasibility report;
    ``solution`` is then the best-effort decision found."""

    strategy: str
    solution: Solution
    evaluation: Evaluation
    trace: tuple[TracePoint, ...] = field(default=())
    note: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.evaluation.feasible

    @property
    def violations(self) -> tuple[Violation, ...]:
        return self.evaluation.violations

    def names_queued_deadline(self) -> bool:
        return any(v.constraint is Constraint.QUEUED_ON_TIME for v in self.violations)

    def to_dict(self) -> dict:
        out = {
            "strategy": self.strategy,
            "feasible": self.feasible,
            "solution": self.solution.to_dict(),
            "evaluation": self.evaluation.to_dict(),
        }
        if self.trace:
            out["trace"] = [[t.generation, t.best_fitness, t.mean_fitness] for t in self.trace]
        if self.note:
            out["note"] = self.note
        return out


def finish(strategy: str, inst: ProblemInstance, sol: Solution, **kw) -> SolveResult:
    return SolveResult(strategy, sol, evaluate(inst, sol), **kw)
