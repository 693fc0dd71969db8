"""Classical (scalar) Jacobi eigensolver with pluggable sweep ordering,
rotation trigger, sweep-boundary stopping, and adversarial mode."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import ConvergenceState, max_off_diag, off_diag_norm, require_symmetric, symmetrize
from .costs import CostLedger
from .orderings import MAX_PIVOT, RANDOM, Ordering, ROW_CYCLIC, next_max_pivot, sweep_pairs


@dataclass
class ScalarJacobiConfig:
    ordering: Ordering = field(default_factory=lambda: Ordering(ROW_CYCLIC))
    relative_tolerance: float = 1e-7
    max_sweeps: int = 50
    adversarial: bool = False
    rotation_trigger_tolerance: float | None = None

    def __post_init__(self):
        if not 0.0 < self.relative_tolerance < 1.0:
            raise ValueError("relative tolerance must lie in (0, 1)")

    @property
    def trigger_tolerance(self) -> float:
        if self.rotation_trigger_tolerance is None:
            return self.relative_tolerance
        return self.rotation_trigger_tolerance


def _order_code(ordering: Ordering) -> int:
    return kernels.ORD_ROW if ordering.kind == ROW_CYCLIC else kernels.ORD_COLUMN


def single_sweep(a: np.ndarray, q: np.ndarray, cfg: ScalarJacobiConfig,
                 ledger: CostLedger, reference: float | None = None,
                 sweep_index: int = 0) -> int:
    """Run exactly one ordering pass over a, accumulating rotations into q.

    reference is the scale the trigger rule is measured against; it defaults
    to the current largest off-diagonal entry of a.  Returns the number of
    rotations applied.
    """
    n = a.shape[0]
    if n < 2:
        return 0
    if reference is None:
        reference = max_off_diag(a)[0]
    trigger = cfg.trigger_tolerance * reference
    adv = 1 if cfg.adversarial else 0
    qt = np.ascontiguousarray(q.T)
    counters = kernels.new_counters()
    if cfg.ordering.kind == MAX_PIVOT:
        rotations = 0
        for _ in range(n * (n - 1) // 2):
            i, j = next_max_pivot(a)
            if abs(a[i, j]) <= trigger:
                break
            rotations += kernels.rotate_pair(a, qt, i, j, trigger, adv, counters)
    else:
        pairs = sweep_pairs(cfg.ordering, n, sweep_index)
        rotations = int(kernels.scalar_sweep(a, qt, pairs, trigger, adv, counters))
    q[:, :] = qt.T
    ledger.absorb_counters(counters)
    return rotations


def scalar_jacobi(a: np.ndarray, cfg: ScalarJacobiConfig | None = None,
                  ledger: CostLedger | None = None):
    """Diagonalize a symmetric matrix in place by cyclic/random/max-pivot
    plane rotations.

    Returns (q, d, state): the accumulated orthogonal factor, the diagonal as
    a vector (unsorted, in diagonal order), and the convergence record.  The
    solve stops at a sweep boundary once the largest off-diagonal entry falls
    to relative_tolerance times its initial value, or after max_sweeps sweeps
    with state.converged left False (expected under adversarial rotations).
    """
    cfg = cfg if cfg is not None else ScalarJacobiConfig()
    ledger = ledger if ledger is not None else CostLedger()
    require_symmetric(a)
    symmetrize(a)
    n = a.shape[0]
    if n < 2:
        state = ConvergenceState(0.0, cfg.relative_tolerance, converged=True)
        return np.eye(n), np.diag(a).copy(), state

    initial = max_off_diag(a)[0]
    state = ConvergenceState(initial, cfg.relative_tolerance)
    stop = state.threshold
    trigger = cfg.trigger_tolerance * initial
    adv = 1 if cfg.adversarial else 0
    qt = np.eye(n)

    if initial <= stop:
        state.converged = True
        return np.ascontiguousarray(qt.T), np.diag(a).copy(), state

    use_fast = cfg.ordering.kind not in (MAX_PIVOT,)
    for sweep in range(cfg.max_sweeps):
        counters = kernels.new_counters()
        if use_fast:
            if cfg.ordering.kind == RANDOM:
                pairs = sweep_pairs(cfg.ordering, n, sweep)
            else:
                pairs = sweep_pairs(cfg.ordering, n)
            rotations = int(kernels.scalar_sweep(a, qt, pairs, trigger, adv, counters))
        else:
            rotations = 0
            for _ in range(n * (n - 1) // 2):
                i, j = next_max_pivot(a)
                if abs(a[i, j]) <= trigger:
                    break
                rotations += kernels.rotate_pair(a, qt, i, j, trigger, adv, counters)
        ledger.absorb_counters(counters)
        ledger.sweeps += 1
        current = max_off_diag(a)[0]
        state.record(current, off_diag_norm(a), ledger.flops, rotations)
        if current <= stop:
            state.converged = True
            break
        if rotations == 0:
            break

    return np.ascontiguousarray(qt.T), np.diag(a).copy(), state
