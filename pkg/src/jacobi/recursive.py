"""Cache-oblivious recursive Jacobi: blocked sweeps whose subproblems are
solved by recursion at block size b = n^f, down to a direct base case."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .block import PIVOT_CODES, SOLVER_CODES
from .core import (BlockPartition, ConvergenceState, gather_cross, max_off_diag,
                   off_diag_norm, require_symmetric, symmetrize)
from .costs import CostLedger
from .orderings import CYCLIC_KINDS, MAX_PIVOT, Ordering, ROW_CYCLIC, sweep_pairs
from .pivoting import pivot_fix
from .rotations import BlockRotation, apply_block_right, apply_block_two_sided
from .scalar import ScalarJacobiConfig, scalar_jacobi


def effective_block_size(n: int, f: float) -> int:
    """b = n^f rounded to the nearest integer, floored at 1."""
    if not 0.0 < f < 1.0:
        raise ValueError("need 0 < f < 1")
    return max(1, int(round(n**f)))


@dataclass
class RecursiveJacobiConfig:
    f: float = 0.5
    f_schedule: tuple[float, ...] | None = None
    n_threshold: int = 4
    max_depth: int | None = None
    base_tolerance: float | None = None
    base_solver: str = "scalar"
    base_max_sweeps: int = 50
    ordering: Ordering = field(default_factory=lambda: Ordering(ROW_CYCLIC))
    pivot: str = "none"
    relative_tolerance: float = 1e-7
    rotation_trigger_tolerance: float | None = None
    max_sweeps: int = 50
    # Inner recursion levels stop sweeping once a sweep shrinks the largest
    # off-diagonal entry by less than this factor (a loose base tolerance
    # would otherwise let them spin to max_sweeps); <= 0 disables the guard.
    stall_ratio: float = 0.9

    def __post_init__(self):
        if self.pivot not in PIVOT_CODES:
            raise ValueError(f"pivot must be one of {sorted(PIVOT_CODES)}")
        if self.base_solver not in SOLVER_CODES:
            raise ValueError(f"base_solver must be one of {sorted(SOLVER_CODES)}")
        if not 0.0 < self.relative_tolerance < 1.0:
            raise ValueError("relative tolerance must lie in (0, 1)")
        if self.n_threshold < 2:
            raise ValueError("n_threshold must be at least 2")
        for f in self.schedule:
            if not 0.0 < f < 1.0:
                raise ValueError("log block sizes must lie in (0, 1)")
        if 1.0 / (1.0 - self.schedule[0]) >= np.log2(self.n_threshold):
            warnings.warn(
                f"f={self.schedule[0]} with n_threshold={self.n_threshold} violates the "
                "single-sweep complexity conditions ((1-f)^-1 < log2(n_threshold)); "
                "proceeding anyway", stacklevel=2)

    @property
    def schedule(self) -> tuple[float, ...]:
        if self.f_schedule:
            return tuple(self.f_schedule)
        return (self.f,)

    @property
    def trigger_tolerance(self) -> float:
        if self.rotation_trigger_tolerance is None:
            return self.relative_tolerance
        return self.rotation_trigger_tolerance


def _schedule_entry(fs: tuple[float, ...], level: int) -> float:
    return fs[min(level, len(fs) - 1)]


def _is_base(cfg: RecursiveJacobiConfig, n: int, b: int, depth: int) -> bool:
    capped = cfg.max_depth is not None and depth >= cfg.max_depth
    return n < cfg.n_threshold or 2 * b >= n or capped


def _python_recursive_solve(a, q, cfg, fs, level, depth, trigger, stop, base_stop,
                            ledger, stats) -> bool:
    """Any-ordering fallback mirroring kernels.recursive_solve; q untransposed."""
    n = a.shape[0]
    stats["max_depth"] = max(stats["max_depth"], depth)
    b = effective_block_size(n, _schedule_entry(fs, level))
    if _is_base(cfg, n, b, depth):
        stats["base_solves"] += 1
        if cfg.base_solver == "direct" and n > 1:
            vals, vecs = np.linalg.eigh(a)
            ledger.charge_eig(n)
            q[:, :] = q @ vecs
            a[:, :] = 0.0
            np.fill_diagonal(a, vals)
        else:
            qt = np.ascontiguousarray(q.T)
            counters = kernels.new_counters()
            kernels.scalar_solve(a, qt, kernels.ORD_ROW, trigger, base_stop,
                                 cfg.base_max_sweeps, 0, counters)
            ledger.absorb_counters(counters)
            q[:, :] = qt.T
        return kernels.max_off_abs(a) <= stop

    part = BlockPartition(n, b)
    prev = np.inf
    for sweep in range(cfg.max_sweeps):
        pairs = sweep_pairs(cfg.ordering, part.count, sweep)
        rotated = 0
        for bi, bj in pairs:
            rotated += _python_pair_step(a, q, part, int(bi), int(bj), cfg, fs, level,
                                         depth, trigger, stop, base_stop, ledger, stats)
        cur = kernels.max_off_abs(a)
        if cur <= stop:
            return True
        if rotated == 0:
            return False
        if depth > 0 and cfg.stall_ratio > 0 and sweep >= 1 and cur > cfg.stall_ratio * prev:
            stats["stalls"] += 1
            return False
        prev = cur
    return False


def _python_pair_step(a, q, part, bi, bj, cfg, fs, level, depth, trigger, stop,
                      base_stop, ledger, stats) -> int:
    sub = gather_cross(a, part, bi, bj)
    ledger.block_pair_visits += 1
    if kernels.max_off_abs(sub) <= trigger:
        return 0
    sub_q = np.eye(sub.shape[0])
    _python_recursive_solve(sub, sub_q, cfg, fs, level + 1, depth + 1, trigger, stop,
                            base_stop, ledger, stats)
    order = np.argsort(-np.diag(sub))
    br = BlockRotation(np.ascontiguousarray(sub_q[:, order]), bi, bj)
    if cfg.pivot != "none":
        pivot_fix(br, cfg.pivot, ledger, top_rows=part.width(bi))
    apply_block_two_sided(a, part, br, ledger)
    apply_block_right(q, part, br, ledger)
    return 1


def recursive_jacobi(a: np.ndarray, cfg: RecursiveJacobiConfig,
                     ledger: CostLedger | None = None, depth: int = 0):
    """Recursive Jacobi eigensolver; returns (q, d, state).

    The stopping threshold is fixed from this matrix at every recursion level,
    so subproblems are driven to the same absolute accuracy as the top level;
    base cases run scalar Jacobi to base_tolerance (or a direct reference
    eigendecomposition).  state reports the deepest recursion level reached
    and the number of base-case solves.
    """
    ledger = ledger if ledger is not None else CostLedger()
    require_symmetric(a)
    symmetrize(a)
    n = a.shape[0]
    if n < 2:
        return np.eye(n), np.diag(a).copy(), ConvergenceState(0.0, cfg.relative_tolerance, converged=True)

    fs = cfg.schedule
    initial = max_off_diag(a)[0]
    state = ConvergenceState(initial, cfg.relative_tolerance)
    stop = state.threshold
    trigger = cfg.trigger_tolerance * initial
    base_tol = cfg.base_tolerance if cfg.base_tolerance is not None else cfg.relative_tolerance
    base_stop = base_tol * initial
    if initial <= stop:
        state.converged = True
        return np.eye(n), np.diag(a).copy(), state

    b = effective_block_size(n, _schedule_entry(fs, depth))
    if _is_base(cfg, n, b, depth):
        state.max_depth_reached = depth
        state.base_case_solves = 1
        if cfg.base_solver == "direct":
            vals, vecs = np.linalg.eigh(a)
            ledger.charge_eig(n)
            a[:, :] = 0.0
            np.fill_diagonal(a, vals)
            ledger.sweeps += 1
            state.record(0.0, 0.0, ledger.flops, 0)
            state.converged = True
            return np.ascontiguousarray(vecs), np.diag(a).copy(), state
        base_ordering = cfg.ordering if cfg.ordering.kind in CYCLIC_KINDS else Ordering(ROW_CYCLIC)
        base_cfg = ScalarJacobiConfig(ordering=base_ordering,
                                      relative_tolerance=base_tol,
                                      max_sweeps=cfg.base_max_sweeps,
                                      rotation_trigger_tolerance=cfg.trigger_tolerance)
        q, d, base_state = scalar_jacobi(a, base_cfg, ledger)
        state.sweeps = base_state.sweeps
        state.history = base_state.history
        state.converged = max_off_diag(a)[0] <= stop
        return q, d, state

    if cfg.ordering.kind == MAX_PIVOT:
        raise ValueError("max-pivot ordering is not supported by the recursive solver")

    part = BlockPartition(n, b)
    offsets = part.offsets()
    use_fast = cfg.ordering.kind in CYCLIC_KINDS
    order_code = kernels.ORD_ROW if cfg.ordering.kind == ROW_CYCLIC else kernels.ORD_COLUMN
    fs_arr = np.asarray(fs, dtype=np.float64)
    max_depth = -1 if cfg.max_depth is None else cfg.max_depth
    stats = {"max_depth": 0, "base_solves": 0, "stalls": 0}
    qt = np.eye(n)
    q_slow = None if use_fast else np.eye(n)

    for sweep in range(cfg.max_sweeps):
        pairs = sweep_pairs(cfg.ordering, part.count, sweep)
        if use_fast:
            counters = kernels.new_counters()
            applied = int(kernels.recursive_sweep(
                a, qt, offsets, pairs, fs_arr, cfg.n_threshold, max_depth, trigger,
                stop, base_stop, cfg.max_sweeps, cfg.base_max_sweeps,
                PIVOT_CODES[cfg.pivot], SOLVER_CODES[cfg.base_solver], order_code,
                cfg.stall_ratio, counters))
            ledger.absorb_counters(counters)
            stats["max_depth"] = max(stats["max_depth"], int(counters[kernels.C_MAX_DEPTH]))
            stats["base_solves"] += int(counters[kernels.C_BASE_SOLVES])
            stats["stalls"] += int(counters[kernels.C_STALLS])
        else:
            applied = 0
            for bi, bj in pairs:
                applied += _python_pair_step(a, q_slow, part, int(bi), int(bj), cfg, fs,
                                             depth, depth, trigger, stop, base_stop,
                                             ledger, stats)
        ledger.sweeps += 1
        current = max_off_diag(a)[0]
        state.record(current, off_diag_norm(a), ledger.flops, applied)
        if current <= stop:
            state.converged = True
            break
        if applied == 0:
            break

    state.max_depth_reached = stats["max_depth"]
    state.base_case_solves = stats["base_solves"]
    state.inner_stalls = stats["stalls"]
    q = np.ascontiguousarray(qt.T) if use_fast else q_slow
    return q, np.diag(a).copy(), state
