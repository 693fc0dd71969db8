"""Blocked Jacobi: annihilate b x b off-diagonal blocks by diagonalizing
2b x 2b cross submatrices, with optional pivot fix and adversarial mode."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (BlockPartition, ConvergenceState, gather_cross, max_off_diag,
                   off_diag_norm, require_symmetric, symmetrize)
from .costs import CostLedger, eig_flops
from .orderings import (MAX_PIVOT, RANDOM, Ordering, ROW_CYCLIC, next_max_pivot_block,
                        sweep_pairs)
from .pivoting import pivot_fix
from .rotations import BlockRotation, apply_block_right, apply_block_two_sided

PIVOT_CODES = {"none": kernels.PIVOT_NONE, "lupp": kernels.PIVOT_LUPP, "qrcp": kernels.PIVOT_QRCP}
SOLVER_CODES = {"scalar": kernels.SOLVER_SCALAR, "direct": kernels.SOLVER_DIRECT}


@dataclass
class BlockJacobiConfig:
    b: int = 8
    ordering: Ordering = field(default_factory=lambda: Ordering(ROW_CYCLIC))
    pivot: str = "none"
    block_solver: str = "scalar"
    inner_ordering: Ordering = field(default_factory=lambda: Ordering(ROW_CYCLIC))
    inner_max_sweeps: int = 50
    adversarial: bool = False
    adversarial_sweep_cap: int = 4
    relative_tolerance: float = 1e-7
    rotation_trigger_tolerance: float | None = None
    max_sweeps: int = 50

    def __post_init__(self):
        if self.pivot not in PIVOT_CODES:
            raise ValueError(f"pivot must be one of {sorted(PIVOT_CODES)}")
        if self.block_solver not in SOLVER_CODES:
            raise ValueError(f"block_solver must be one of {sorted(SOLVER_CODES)}")
        if not 0.0 < self.relative_tolerance < 1.0:
            raise ValueError("relative tolerance must lie in (0, 1)")

    @property
    def trigger_tolerance(self) -> float:
        if self.rotation_trigger_tolerance is None:
            return self.relative_tolerance
        return self.rotation_trigger_tolerance

    @property
    def inner_sweep_cap(self) -> int:
        return self.adversarial_sweep_cap if self.adversarial else self.inner_max_sweeps


def block_sub_solve(sub: np.ndarray, cfg: BlockJacobiConfig, ledger: CostLedger,
                    trigger: float | None = None) -> BlockRotation:
    """Diagonalize one cross submatrix in place and return its rotation.

    The scalar backend runs cyclic Jacobi down to the supplied absolute
    trigger (or relative to the submatrix when none is given); the direct
    backend is a dense reference eigendecomposition charged at 8 2/3 n^3.
    Eigenvalues are ordered descending so repeated runs are deterministic.
    """
    w = sub.shape[0]
    if trigger is None:
        trigger = cfg.trigger_tolerance * (max_off_diag(sub)[0] if w > 1 else 0.0)
    if cfg.block_solver == "direct":
        vals, vecs = np.linalg.eigh(sub)
        ledger.charge("eig", eig_flops(w))
        order = np.argsort(-vals)
        q = np.ascontiguousarray(vecs[:, order])
        sub[:, :] = 0.0
        np.fill_diagonal(sub, vals[order])
    else:
        counters = kernels.new_counters()
        qt = np.eye(w)
        kernels.scalar_solve(sub, qt, kernels.ORD_ROW if cfg.inner_ordering.kind == ROW_CYCLIC
                             else kernels.ORD_COLUMN, trigger, trigger,
                             cfg.inner_sweep_cap, 1 if cfg.adversarial else 0, counters)
        ledger.absorb_counters(counters)
        if cfg.adversarial:
            # keep the sabotaged column order; a descending sort would undo
            # the near-swap rotations the adversarial mode relies on
            q = np.ascontiguousarray(qt.T)
        else:
            order = np.argsort(-np.diag(sub))
            q = np.ascontiguousarray(qt.T[:, order])
            sub[:, :] = sub[np.ix_(order, order)]
    return BlockRotation(q, 0, 1)


def _python_block_sweep(a, q, part, pairs, trigger, cfg, ledger) -> int:
    """Reference sweep built from the public block operations; used by the
    solver for non-cyclic orderings and by tests to validate the kernel path."""
    applied = 0
    for bi, bj in pairs:
        sub = gather_cross(a, part, int(bi), int(bj))
        ledger.block_pair_visits += 1
        if max_off_diag(sub)[0] <= trigger:
            continue
        br = block_sub_solve(sub, cfg, ledger, trigger)
        br.bi, br.bj = int(bi), int(bj)
        if cfg.pivot != "none":
            pivot_fix(br, cfg.pivot, ledger, top_rows=part.width(int(bi)))
        apply_block_two_sided(a, part, br, ledger)
        apply_block_right(q, part, br, ledger)
        applied += 1
    return applied


def block_jacobi(a: np.ndarray, cfg: BlockJacobiConfig, ledger: CostLedger | None = None):
    """Blocked Jacobi eigensolver; returns (q, d, state) like scalar_jacobi.

    Each triggered block pair is gathered, diagonalized by the configured
    backend (adversarial scalar solves are capped at adversarial_sweep_cap
    sweeps), optionally pivot-fixed, and applied two-sided.  Convergence is
    checked at sweep boundaries against the initial largest off-diagonal.
    """
    ledger = ledger if ledger is not None else CostLedger()
    require_symmetric(a)
    symmetrize(a)
    n = a.shape[0]
    if n < 2:
        return np.eye(n), np.diag(a).copy(), ConvergenceState(0.0, cfg.relative_tolerance, converged=True)
    part = BlockPartition(n, cfg.b)
    if part.count < 2:
        raise ValueError(f"block size {cfg.b} leaves no off-diagonal block pair for n={n}")

    initial = max_off_diag(a)[0]
    state = ConvergenceState(initial, cfg.relative_tolerance)
    stop = state.threshold
    trigger = cfg.trigger_tolerance * initial
    if initial <= stop:
        state.converged = True
        return np.eye(n), np.diag(a).copy(), state

    offsets = part.offsets()
    use_fast = cfg.ordering.kind != MAX_PIVOT
    inner_order = kernels.ORD_ROW if cfg.inner_ordering.kind == ROW_CYCLIC else kernels.ORD_COLUMN
    qt = np.eye(n)
    q_slow = None

    for sweep in range(cfg.max_sweeps):
        counters = kernels.new_counters()
        if use_fast:
            pairs = sweep_pairs(cfg.ordering, part.count, sweep)
            applied = int(kernels.block_sweep(
                a, qt, offsets, pairs, trigger, PIVOT_CODES[cfg.pivot],
                SOLVER_CODES[cfg.block_solver], inner_order, trigger,
                cfg.inner_sweep_cap, 1 if cfg.adversarial else 0, counters))
            ledger.absorb_counters(counters)
        else:
            if q_slow is None:
                q_slow = np.ascontiguousarray(qt.T)
            applied = 0
            for _ in range(part.count * (part.count - 1) // 2):
                bi, bj = next_max_pivot_block(a, part)
                step = _python_block_sweep(a, q_slow, part, [(bi, bj)], trigger, cfg, ledger)
                if step == 0:
                    break
                applied += step
        ledger.sweeps += 1
        current = max_off_diag(a)[0]
        state.record(current, off_diag_norm(a), ledger.flops, applied)
        if current <= stop:
            state.converged = True
            break
        if applied == 0:
            break

    q = np.ascontiguousarray(qt.T) if q_slow is None else q_slow
    return q, np.diag(a).copy(), state
