"""Pivoted factorizations used to safeguard block-rotation conditioning:
recursive LU with partial pivoting, column-pivoted Householder QR, and the
column-permutation fix they induce on block rotations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .costs import CostLedger
from .rotations import BlockRotation


@dataclass
class PivotResult:
    """Row permutation p with A[p, :] = L @ U, L unit lower trapezoidal."""

    perm: np.ndarray
    L: np.ndarray
    U: np.ndarray


@dataclass
class QrcpResult:
    """Column permutation p with A[:, p] = Q @ R, |diag(R)| non-increasing."""

    perm: np.ndarray
    Q: np.ndarray
    R: np.ndarray


def recursive_lupp(a: np.ndarray, ledger: CostLedger | None = None) -> PivotResult:
    """LU with partial pivoting by recursive halving of the column range.

    The column range is split at floor(n/2): the left half is factored
    recursively, the right half is row-permuted accordingly and updated by a
    unit-lower triangular solve plus a Schur complement, and the trailing
    block is factored recursively.  Base case is a single column divided by
    its largest entry, so |L| <= 1 strictly below the diagonal throughout.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    m, n = a.shape
    if m < n or n < 1:
        raise ValueError("need m >= n >= 1")
    if ledger is not None:
        ledger.charge_lupp(m, n)
    perm, lower, upper = _lupp_recurse(a)
    return PivotResult(perm, lower, upper)


def _lupp_recurse(a: np.ndarray):
    m, n = a.shape
    perm = np.arange(m)
    p = int(np.argmax(np.abs(a[:, 0])))
    if a[p, 0] == 0.0:
        raise np.linalg.LinAlgError("rank deficient")
    if p != 0:
        a[[0, p], :] = a[[p, 0], :]
        perm[0], perm[p] = perm[p], perm[0]
    if n == 1:
        u = a[0, 0]
        return perm, a[:, :1] / u, np.array([[u]])

    h = n // 2
    perm_l, low_l, up_l = _lupp_recurse(a[:, :h].copy())
    right = a[perm_l][:, h:]
    right[:h] = solve_triangular(low_l[:h], right[:h], lower=True, unit_diagonal=True)
    right[h:] -= low_l[h:] @ right[:h]
    perm_r, low_r, up_r = _lupp_recurse(right[h:])

    lower = np.zeros((m, n))
    lower[:h, :h] = low_l[:h]
    lower[h:, :h] = low_l[h:][perm_r]
    lower[h:, h:] = low_r
    upper = np.zeros((n, n))
    upper[:h, :h] = up_l
    upper[:h, h:] = right[:h]
    upper[h:, h:] = up_r

    total = perm[perm_l]
    total[h:] = total[h:][perm_r]
    return total, lower, upper


def householder_qr(a: np.ndarray, pivoting: bool = True):
    """Householder QR, optionally with greedy column-norm pivoting.

    Partial column norms are downdated after each reflection and recomputed
    from scratch once a downdated norm drops below sqrt(eps) of its original
    value.  Returns (perm, Q, R) with k = min(m, n) reflections, Q of shape
    (m, k) with orthonormal columns and R of shape (k, n) upper triangular.
    """
    r = np.array(a, dtype=np.float64, copy=True)
    m, n = r.shape
    k = min(m, n)
    perm = np.arange(n)
    vectors: list[np.ndarray | None] = []
    if pivoting:
        norms2 = np.sum(r * r, axis=0)
        ref2 = norms2.copy()
        recompute_at = np.finfo(np.float64).eps  # (sqrt(eps))^2 on squared norms

    for step in range(k):
        if pivoting:
            pick = step + int(np.argmax(norms2[step:]))
            if pick != step:
                r[:, [step, pick]] = r[:, [pick, step]]
                perm[step], perm[pick] = perm[pick], perm[step]
                norms2[step], norms2[pick] = norms2[pick], norms2[step]
                ref2[step], ref2[pick] = ref2[pick], ref2[step]
        x = r[step:, step]
        if float(np.linalg.norm(x[1:])) == 0.0:
            # column already triangular; no reflection needed
            vectors.append(None)
        else:
            norm_x = float(np.linalg.norm(x))
            alpha = -norm_x if x[0] >= 0 else norm_x
            v = x.copy()
            v[0] -= alpha
            v /= np.linalg.norm(v)
            r[step:, step:] -= 2.0 * np.outer(v, v @ r[step:, step:])
            r[step:, step] = 0.0
            r[step, step] = alpha
            vectors.append(v)
        if pivoting and step + 1 < n:
            tail = slice(step + 1, n)
            norms2[tail] = np.maximum(norms2[tail] - r[step, tail] ** 2, 0.0)
            stale = np.flatnonzero(norms2[tail] < recompute_at * ref2[tail]) + step + 1
            for col in stale:
                norms2[col] = float(np.sum(r[step + 1:, col] ** 2))
                ref2[col] = norms2[col]

    q = np.zeros((m, k))
    q[:k, :k] = np.eye(k)
    for step in range(k - 1, -1, -1):
        v = vectors[step]
        if v is not None:
            q[step:, :] -= 2.0 * np.outer(v, v @ q[step:, :])
    return perm, q, np.triu(r[:k, :])


def qrcp(a: np.ndarray, ledger: CostLedger | None = None) -> QrcpResult:
    """Column-pivoted QR (greedy column norms)."""
    if ledger is not None:
        ledger.charge_qrcp(a.shape[0], a.shape[1])
    perm, q, r = householder_qr(a, pivoting=True)
    return QrcpResult(perm, q, r)


def pivot_fix(br: BlockRotation, method: str = "lupp",
              ledger: CostLedger | None = None, top_rows: int | None = None) -> np.ndarray:
    """Permute the columns of a block rotation so its upper-left block is
    well conditioned.

    The permutation comes from recursive LUPP of the leading-rows transpose
    (or, with method="qrcp", from column-pivoted QR of the leading rows) and
    is applied in place.  Returns the permutation used.
    """
    q = br.q
    w = q.shape[0]
    top = w // 2 if top_rows is None else top_rows
    if not 0 < top < w:
        raise ValueError("leading row count must split the rotation")
    if method == "lupp":
        perm = recursive_lupp(q[:top, :].T, ledger).perm
    elif method == "qrcp":
        perm = qrcp(q[:top, :], ledger).perm
    else:
        raise ValueError(f"unknown pivot method {method!r}")
    br.q = np.ascontiguousarray(q[:, perm])
    return perm


def lemma_bound(b: int) -> float:
    """Closed-form lower bound on sigma_min of the pivot-fixed upper-left
    b x b block of an orthogonal 2b x 2b matrix."""
    if b < 1:
        raise ValueError("need b >= 1")
    return 3.0 * np.sqrt(2.0) / np.sqrt((3.0 * b * b + b) * (4.0**b + 6.0 * b - 1.0))
