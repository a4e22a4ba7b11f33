"""Integer encoding of a Solution, shared by the GA and the exhaustive oracle.

``order_genes[q]`` holds the task index at queue position ``q + 1`` (or -1),
``rb_genes[j]`` the arrival index owning RB ``j`` (or -1). Both constraints on
positions and RB ownership hold by construction once duplicates are removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import ProblemInstance, Solution, StructuralError, check_structure

HOLE = -1


@dataclass(frozen=True)
class Chromosome:
    order_genes: tuple[int, ...]
    rb_genes: tuple[int, ...]

    def key(self) -> tuple[int, ...]:
        return self.order_genes + self.rb_genes


def encode(inst: ProblemInstance, sol: Solution) -> Chromosome:
    check_structure(inst, sol)
    order = [HOLE] * inst.n_tasks
    for tid, q in sol.queue_position.items():
        if order[q - 1] != HOLE:
            raise StructuralError(f"position {q} is held twice; not encodable")
        order[q - 1] = inst.index_of(tid)
    rb = []
    for owner in sol.rb_owner:
        if owner is None:
            rb.append(HOLE)
            continue
        i = inst.index_of(owner)
        if i >= inst.m:
            raise StructuralError(f"queued task {owner!r} cannot own an RB")
        rb.append(i)
    return Chromosome(tuple(order), tuple(rb))


def decode(inst: ProblemInstance, order_genes, rb_genes) -> Solution:
    ids = [t.id for t in inst.tasks]
    positions = {ids[int(i)]: q + 1 for q, i in enumerate(order_genes) if i != HOLE}
    owners = tuple(None if i == HOLE else ids[int(i)] for i in rb_genes)
    return Solution(positions, owners)


def first_occurrence(genes: np.ndarray, n_values: int) -> np.ndarray:
    """Mask of genes that are a repeat of an earlier gene in the same row."""
    hit = genes[:, :, None] == np.arange(n_values)
    seen = np.cumsum(hit, axis=1)
    return (hit & (seen > 1)).any(axis=2)


def dedupe(genes: np.ndarray, n_values: int) -> np.ndarray:
    out = genes.copy()
    out[first_occurrence(genes, n_values)] = HOLE
    return out
