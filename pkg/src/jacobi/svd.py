"""One-sided Jacobi SVD: right rotations of G that implicitly diagonalize
the Gram matrix, whose 2b x 2b blocks are formed on the fly from block
columns, with optional pivot fix and QR preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .block import BlockJacobiConfig, block_jacobi
from .core import BlockPartition, ConvergenceState, max_off_diag, off_diag_norm
from .costs import CostLedger
from .orderings import CYCLIC_KINDS, MAX_PIVOT, Ordering, ROW_CYCLIC, sweep_pairs
from .pivoting import householder_qr, pivot_fix
from .recursive import RecursiveJacobiConfig, recursive_jacobi
from .rotations import BlockRotation
from . import kernels


@dataclass
class SvdConfig:
    b: int = 8
    ordering: Ordering = field(default_factory=lambda: Ordering(ROW_CYCLIC))
    pivot: str = "none"
    gram_solver: str = "scalar"
    gram_config: object | None = None
    preprocess: str = "none"
    relative_tolerance: float = 1e-9
    max_sweeps: int = 50

    def __post_init__(self):
        if self.pivot not in ("none", "lupp", "qrcp"):
            raise ValueError("pivot must be none, lupp, or qrcp")
        if self.gram_solver not in ("scalar", "block", "recursive", "direct"):
            raise ValueError("gram_solver must be scalar, block, recursive, or direct")
        if self.preprocess not in ("none", "qr", "qrcp"):
            raise ValueError("preprocess must be none, qr, or qrcp")
        if not 0.0 < self.relative_tolerance < 1.0:
            raise ValueError("relative tolerance must lie in (0, 1)")


@dataclass
class SvdResult:
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    state: ConvergenceState


def qr_preprocess(g: np.ndarray, pivoted: bool = False, ledger: CostLedger | None = None):
    """Householder QR pass used to shrink and precondition the SVD input.

    Returns (q_factor, r, perm): g[:, perm] = q_factor @ r with q_factor of
    shape (m, n) and r upper triangular n x n; perm is the identity when
    pivoting is off.
    """
    m, n = g.shape
    if m < n:
        raise ValueError("transpose input first")
    if ledger is not None:
        ledger.charge_qrcp(m, n)
    perm, q_factor, r = householder_qr(g, pivoting=pivoted)
    return q_factor, r, perm


def _gram_block(g: np.ndarray, idx: np.ndarray, ledger: CostLedger) -> np.ndarray:
    """Form G(:,[I,J])^T G(:,[I,J]) by accumulating over 2b-row panels."""
    m = g.shape[0]
    w = idx.size
    cols = g[:, idx]
    sub = np.zeros((w, w))
    for p0 in range(0, m, w):
        panel = cols[p0:p0 + w]
        sub += panel.T @ panel
        ledger.charge_matmul(w, panel.shape[0], w)
    return 0.5 * (sub + sub.T)


def _scaled_max_off(sub: np.ndarray) -> float:
    """max |sub_ij| / sqrt(sub_ii sub_jj): the scale-invariant orthogonality
    measure for Gram blocks.  Zero-norm columns count as orthogonal."""
    d = np.sqrt(np.maximum(np.diag(sub), 0.0))
    denom = np.outer(d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.abs(sub) / denom
    ratio[~np.isfinite(ratio)] = 0.0
    np.fill_diagonal(ratio, 0.0)
    return float(ratio.max(initial=0.0))


def _diagonalize_gram(sub: np.ndarray, cfg: SvdConfig, ledger: CostLedger) -> np.ndarray:
    """Diagonalize one Gram block; the rotation keeps the backend's natural
    column order (each backend is deterministic), so the b = 1 scalar path
    reduces to plain scalar Jacobi run implicitly on the Gram matrix."""
    w = sub.shape[0]
    if cfg.gram_solver == "direct":
        vals, vecs = np.linalg.eigh(sub)
        ledger.charge_eig(w)
        sub[:, :] = 0.0
        np.fill_diagonal(sub, vals)
        return np.ascontiguousarray(vecs)
    if cfg.gram_solver == "block":
        inner = cfg.gram_config if cfg.gram_config is not None else BlockJacobiConfig(
            b=max(1, w // 4), relative_tolerance=cfg.relative_tolerance)
        vhat, _, _ = block_jacobi(sub, inner, ledger)
    elif cfg.gram_solver == "recursive":
        inner = cfg.gram_config if cfg.gram_config is not None else RecursiveJacobiConfig(
            relative_tolerance=cfg.relative_tolerance)
        vhat, _, _ = recursive_jacobi(sub, inner, ledger)
    else:
        counters = kernels.new_counters()
        qt = np.eye(w)
        # the scaled criterion |sub_ij| <= tol sqrt(d_i d_j) is tightest at the
        # smallest diagonal entry; solve down to that absolute level
        d_min = float(np.min(np.diag(sub)))
        thresh = max(cfg.relative_tolerance * max(d_min, 0.0),
                     np.finfo(np.float64).eps * kernels.max_off_abs(sub))
        kernels.scalar_solve(sub, qt, kernels.ORD_ROW, thresh, thresh, cfg.max_sweeps,
                             0, counters)
        ledger.absorb_counters(counters)
        return np.ascontiguousarray(qt.T)
    return vhat


def jacobi_svd(g: np.ndarray, cfg: SvdConfig | None = None,
               ledger: CostLedger | None = None) -> SvdResult:
    """One-sided Jacobi SVD of an m x n matrix with m >= n.

    Convergence uses the scaled criterion |g_i . g_j| / (|g_i| |g_j|) <=
    relative_tolerance, both as the per-block rotation trigger and as the
    sweep-boundary stopping rule; history rows additionally carry the
    unscaled off-diagonal Frobenius norm of the implicit Gram matrix for
    cross-comparison with the eigensolvers.
    """
    cfg = cfg if cfg is not None else SvdConfig()
    ledger = ledger if ledger is not None else CostLedger()
    g = np.array(g, dtype=np.float64, order="C", copy=True)
    if g.ndim != 2:
        raise ValueError("expected a matrix")
    m, n = g.shape
    if m < n:
        raise ValueError("transpose input first")

    if cfg.preprocess != "none":
        return _preprocessed_svd(g, cfg, ledger)

    if n == 1:
        sigma = np.array([float(np.linalg.norm(g[:, 0]))])
        u = g / sigma[0] if sigma[0] > 0 else g
        state = ConvergenceState(0.0, cfg.relative_tolerance, converged=True)
        return SvdResult(u, sigma, np.eye(1), state)

    if cfg.ordering.kind == MAX_PIVOT:
        raise ValueError("max-pivot ordering is not supported by the one-sided solver")

    b = min(cfg.b, n // 2)
    b = max(b, 1)
    part = BlockPartition(n, b)
    v = np.eye(n)

    gram = g.T @ g
    state = ConvergenceState(_scaled_max_off(gram), cfg.relative_tolerance)
    tol = cfg.relative_tolerance
    if state.initial_max_off_diag <= tol:
        state.converged = True
        return _finish(g, v, state, ledger, cfg)

    for sweep in range(cfg.max_sweeps):
        pairs = sweep_pairs(cfg.ordering, part.count, sweep)
        applied = 0
        for bi, bj in pairs:
            idx = np.concatenate([part.indices(int(bi)), part.indices(int(bj))])
            sub = _gram_block(g, idx, ledger)
            ledger.block_pair_visits += 1
            if _scaled_max_off(sub) <= tol:
                continue
            vhat = _diagonalize_gram(sub, cfg, ledger)
            br = BlockRotation(vhat, int(bi), int(bj))
            if cfg.pivot != "none":
                pivot_fix(br, cfg.pivot, ledger, top_rows=part.width(int(bi)))
            w = idx.size
            g[:, idx] = g[:, idx] @ br.q
            v[:, idx] = v[:, idx] @ br.q
            ledger.charge_matmul(m, w, w)
            ledger.charge_matmul(n, w, w)
            applied += 1
        ledger.sweeps += 1
        gram = g.T @ g
        state.record(_scaled_max_off(gram), off_diag_norm(gram), ledger.flops, applied)
        if applied == 0:
            state.converged = True
            break

    return _finish(g, v, state, ledger, cfg)


def _finish(g, v, state, ledger, cfg) -> SvdResult:
    m, n = g.shape
    sigma = np.linalg.norm(g, axis=0)
    cutoff = np.finfo(np.float64).eps * sigma.max(initial=0.0)
    u = np.zeros_like(g)
    nonzero = sigma > cutoff
    u[:, nonzero] = g[:, nonzero] / sigma[nonzero]
    sigma = np.where(nonzero, sigma, 0.0)
    ledger.charge("misc", 3 * m * n)
    return SvdResult(u, sigma, v, state)


def _preprocessed_svd(g, cfg, ledger) -> SvdResult:
    m, n = g.shape
    q_factor, r, perm = qr_preprocess(g, pivoted=(cfg.preprocess == "qrcp"), ledger=ledger)
    inner_cfg = SvdConfig(b=cfg.b, ordering=cfg.ordering, pivot=cfg.pivot,
                          gram_solver=cfg.gram_solver, gram_config=cfg.gram_config,
                          preprocess="none", relative_tolerance=cfg.relative_tolerance,
                          max_sweeps=cfg.max_sweeps)
    inner = jacobi_svd(np.ascontiguousarray(r.T), inner_cfg, ledger)
    # R^T = U_i S V_i^T, so G[:, perm] = Qf R = (Qf V_i) S U_i^T
    u = q_factor @ inner.V
    ledger.charge_matmul(m, n, n)
    v_out = np.empty((n, n))
    v_out[perm, :] = inner.U
    return SvdResult(u, inner.sigma, v_out, inner.state)
