"""Plane rotations: the 2x2 angle solve, two-sided/one-sided application, and
their 2b x 2b block counterparts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BlockPartition
from .costs import CostLedger


@dataclass(frozen=True)
class Rotation2x2:
    """cos/sin of one plane rotation acting on rows/columns i < j."""

    c: float
    s: float
    i: int = 0
    j: int = 1

    def at(self, i: int, j: int) -> "Rotation2x2":
        if not i < j:
            raise ValueError("need i < j")
        return Rotation2x2(self.c, self.s, i, j)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.c, -self.s], [self.s, self.c]])


@dataclass
class BlockRotation:
    """Orthogonal 2b x 2b factor acting on block rows/columns bi < bj."""

    q: np.ndarray
    bi: int
    bj: int


def solve_2x2(a11: float, a12: float, a22: float, adversarial: bool = False):
    """Rotation diagonalizing [[a11,a12],[a12,a22]], plus the rotated diagonal.

    The inner angle |theta| <= pi/4 comes from the stable tangent formula
    t = sign(tau) / (|tau| + sqrt(1 + tau^2)) with tau = (a11 - a22) / (2 a12);
    a tie (tau = 0) takes theta = pi/4 with sign(s) = sign(a12).  Adversarial
    mode shifts theta by pi/2, which still annihilates the off-diagonal pair
    in exact arithmetic but swaps the two diagonal values.
    """
    if a12 == 0.0:
        return Rotation2x2(1.0, 0.0), (a11, a22)
    tau = (a11 - a22) / (2.0 * a12)
    if tau == 0.0:
        t = 1.0 if a12 > 0 else -1.0
    elif tau > 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    d1 = a11 + t * a12
    d2 = a22 - t * a12
    if adversarial:
        # theta + pi/2: (c, s) -> (-s, c), diagonal positions swap
        return Rotation2x2(-s, c), (d2, d1)
    return Rotation2x2(c, s), (d1, d2)


def apply_two_sided(a: np.ndarray, rot: Rotation2x2, ledger: CostLedger | None = None) -> None:
    """A <- J^T A J with the rotation embedded at (i, j); symmetry kept exact."""
    n = a.shape[0]
    i, j, c, s = rot.i, rot.j, rot.c, rot.s
    if not 0 <= i < j < n:
        raise ValueError("rotation indices out of range")
    aii, ajj, aij = a[i, i], a[j, j], a[i, j]
    row_i = c * a[i, :] + s * a[j, :]
    row_j = -s * a[i, :] + c * a[j, :]
    a[i, :] = row_i
    a[j, :] = row_j
    a[:, i] = row_i
    a[:, j] = row_j
    a[i, i] = c * c * aii + 2.0 * s * c * aij + s * s * ajj
    a[j, j] = s * s * aii - 2.0 * s * c * aij + c * c * ajj
    a[i, j] = a[j, i] = (c * c - s * s) * aij - s * c * (aii - ajj)
    if ledger is not None:
        ledger.charge_rotation(n)


def apply_right(q: np.ndarray, rot: Rotation2x2) -> None:
    """Q <- Q J: combine columns i and j."""
    i, j, c, s = rot.i, rot.j, rot.c, rot.s
    if not 0 <= i < j < q.shape[1]:
        raise ValueError("rotation indices out of range")
    col_i = c * q[:, i] + s * q[:, j]
    col_j = -s * q[:, i] + c * q[:, j]
    q[:, i] = col_i
    q[:, j] = col_j


def _cross_indices(part: BlockPartition, bi: int, bj: int) -> np.ndarray:
    return np.concatenate([part.indices(bi), part.indices(bj)])


def apply_block_two_sided(a: np.ndarray, part: BlockPartition, br: BlockRotation,
                          ledger: CostLedger | None = None) -> None:
    """A <- J^T A J with the orthogonal block factor embedded at (bi, bj).

    Updates the two block-row slabs, then the block-column slabs, then
    re-symmetrizes the touched strips to cap rounding drift.
    """
    n = a.shape[0]
    idx = _cross_indices(part, br.bi, br.bj)
    w = idx.size
    if br.q.shape != (w, w):
        raise ValueError(f"block rotation must be {w}x{w}, got {br.q.shape}")
    a[idx, :] = br.q.T @ a[idx, :]
    a[:, idx] = a[:, idx] @ br.q
    strips = 0.5 * (a[idx, :] + a[:, idx].T)
    a[idx, :] = strips
    a[:, idx] = strips.T
    if ledger is not None:
        ledger.charge_matmul(w, w, n)
        ledger.charge_matmul(n, w, w)


def apply_block_right(q: np.ndarray, part: BlockPartition, br: BlockRotation,
                      ledger: CostLedger | None = None) -> None:
    """Q <- Q J at block granularity: combine block columns bi and bj."""
    idx = _cross_indices(part, br.bi, br.bj)
    w = idx.size
    if br.q.shape != (w, w):
        raise ValueError(f"block rotation must be {w}x{w}, got {br.q.shape}")
    q[:, idx] = q[:, idx] @ br.q
    if ledger is not None:
        ledger.charge_matmul(q.shape[0], w, w)
