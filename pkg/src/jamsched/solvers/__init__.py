from .baselines import fcfs_solution, solve_fcfs, solve_stf, stf_solution
from .encoding import Chromosome, decode, encode
from .exhaustive import BudgetExceeded, search_size, solve_exhaustive
from .ga import GAConfig, solve_ga
from .result import SolveResult, TracePoint

__all__ = [
    "BudgetExceeded",
    "Chromosome",
    "GAConfig",
    "SolveResult",
    "TracePoint",
    "decode",
    "encode",
    "fcfs_solution",
    "search_size",
    "solve_exhaustive",
    "solve_fcfs",
    "solve_ga",
    "solve_stf",
    "stf_solution",
]
