"""Sweep orderings over off-diagonal index pairs (scalar entries or blocks)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BlockPartition

COLUMN_CYCLIC = "column-cyclic"
ROW_CYCLIC = "row-cyclic"
RANDOM = "random"
MAX_PIVOT = "max-pivot"

CYCLIC_KINDS = (COLUMN_CYCLIC, ROW_CYCLIC)


@dataclass(frozen=True)
class Ordering:
    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (COLUMN_CYCLIC, ROW_CYCLIC, RANDOM, MAX_PIVOT):
            raise ValueError(f"unknown ordering kind {self.kind!r}")

    @property
    def name(self) -> str:
        return f"random:{self.seed}" if self.kind == RANDOM else self.kind


def parse_ordering(text: str) -> Ordering:
    """Parse a CLI ordering name: column-cyclic, row-cyclic, random:<seed>, max-pivot."""
    if text.startswith("random:"):
        return Ordering(RANDOM, int(text.split(":", 1)[1]))
    if text == RANDOM:
        return Ordering(RANDOM, 0)
    return Ordering(text)


def column_cyclic_pairs(count: int) -> np.ndarray:
    """(1,2),(1,3),(2,3),(1,4),... -- columns left to right, ascending row in each."""
    pairs = [(i, j) for j in range(1, count) for i in range(j)]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def row_cyclic_pairs(count: int) -> np.ndarray:
    """(1,2),(1,3),...,(1,n),(2,3),... -- rows top to bottom."""
    pairs = [(i, j) for i in range(count - 1) for j in range(i + 1, count)]
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def sweep_pairs(ordering: Ordering, count: int, sweep: int = 0) -> np.ndarray:
    """All count*(count-1)/2 strict-upper pairs for one sweep, in sweep order.

    Random ordering reshuffles every sweep; the shuffle is keyed on
    (seed, sweep) so runs are reproducible and sweeps can be generated
    independently.
    """
    if count < 2:
        raise ValueError("need at least two indices")
    if ordering.kind == COLUMN_CYCLIC:
        return column_cyclic_pairs(count)
    if ordering.kind == ROW_CYCLIC:
        return row_cyclic_pairs(count)
    if ordering.kind == RANDOM:
        pairs = row_cyclic_pairs(count)
        rng = np.random.default_rng((ordering.seed, sweep))
        return pairs[rng.permutation(len(pairs))]
    raise ValueError(f"{ordering.kind} is stateful; use next_max_pivot per step")


def next_max_pivot(a: np.ndarray) -> tuple[int, int]:
    """Index pair of the largest |off-diagonal| entry, ties to the first in row-major order."""
    n = a.shape[0]
    if n < 2:
        raise ValueError("no off-diagonal")
    b = np.abs(np.triu(a, 1))
    i, j = divmod(int(np.argmax(b)), n)
    return i, j


def next_max_pivot_block(a: np.ndarray, part: BlockPartition) -> tuple[int, int]:
    """Block pair maximizing the Frobenius norm of the off-diagonal block."""
    best = -1.0
    best_pair = (0, 1)
    for bi in range(part.count - 1):
        ri = slice(part.start(bi), part.stop(bi))
        for bj in range(bi + 1, part.count):
            rj = slice(part.start(bj), part.stop(bj))
            nrm = float(np.linalg.norm(a[ri, rj]))
            if nrm > best:
                best = nrm
                best_pair = (bi, bj)
    return best_pair
