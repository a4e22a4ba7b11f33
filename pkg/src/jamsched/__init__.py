"""Jamming-aware joint task scheduling and RB allocation for edge offloading."""

from .channel import LinkBudget, bit_error_prob, sjnr, task_error_prob, td_error_prob
from .evaluator import evaluate, validate_solution
from .model import (
    Constraint,
    Evaluation,
    ProblemInstance,
    Solution,
    StructuralError,
    Task,
    TaskEval,
    TaskKind,
    Violation,
)
from .solvers import GAConfig, SolveResult, solve_exhaustive, solve_fcfs, solve_ga, solve_stf
from .taskgen import GenRanges, generate_instance, generate_sjnr_matrix

__version__ = "0.1.0"

__all__ = [
    "Constraint", "Evaluation", "GAConfig", "GenRanges", "LinkBudget", "ProblemInstance",
    "Solution", "SolveResult", "StructuralError", "Task", "TaskEval", "TaskKind", "Violation",
    "bit_error_prob", "evaluate", "generate_instance", "generate_sjnr_matrix", "sjnr",
    "solve_exhaustive", "solve_fcfs", "solve_ga", "solve_stf", "task_error_prob",
    "td_error_prob", "validate_solution",
]
