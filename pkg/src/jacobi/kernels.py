"""Compiled inner loops for the solvers.

Everything here is a nopython-mode mirror of the reference operations in
rotations.py / pivoting.py, fused for speed: per-rotation updates exploit
symmetry directly, eigenvector accumulators are held transposed so both row
and column updates stream over contiguous memory, and flop/visit counts are
accumulated into a shared int64 counter vector so the Python layer can fold
them into a CostLedger.

Counter layout: indices C_* below.  Flop charges follow the same kernel
formulas as costs.py (exact integers).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# counter vector layout
C_MATMUL = 0
C_EIG = 1
C_QRCP = 2
C_LUPP = 3
C_ROT = 4
C_MISC = 5
C_ROTATIONS = 6
C_PAIR_VISITS = 7
C_BASE_SOLVES = 8
C_MAX_DEPTH = 9
C_STALLS = 10
N_COUNTERS = 11

# ordering codes (cyclic only; other orderings pass explicit pair arrays)
ORD_ROW = 0
ORD_COLUMN = 1

# pivot codes
PIVOT_NONE = 0
PIVOT_LUPP = 1
PIVOT_QRCP = 2

# sub-solver codes
SOLVER_SCALAR = 0
SOLVER_DIRECT = 1


def new_counters() -> np.ndarray:
    return np.zeros(N_COUNTERS, dtype=np.int64)


@njit
def _div3round(x):
    return (x + 1) // 3


@njit
def max_off_abs(a):
    n = a.shape[0]
    best = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            v = abs(a[i, j])
            if v > best:
                best = v
    return best


@njit
def _rotate(a, qt, i, j, trigger, adversarial, counters):
    """Apply one triggered rotation at (i, j); returns 1 if applied."""
    aij = a[i, j]
    if aij == 0.0 or abs(aij) <= trigger:
        return 0
    n = a.shape[0]
    aii = a[i, i]
    ajj = a[j, j]
    tau = (aii - ajj) / (2.0 * aij)
    if tau == 0.0:
        t = 1.0 if aij > 0.0 else -1.0
    elif tau > 0.0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    d1 = aii + t * aij
    d2 = ajj - t * aij
    if adversarial != 0:
        # angle shifted by pi/2: still annihilates (i, j), diagonal swaps
        cc = -s
        ss = c
        dii = d2
        djj = d1
    else:
        cc = c
        ss = s
        dii = d1
        djj = d2
    for k in range(n):
        if k == i or k == j:
            continue
        aik = a[i, k]
        ajk = a[j, k]
        x = cc * aik + ss * ajk
        y = -ss * aik + cc * ajk
        a[i, k] = x
        a[j, k] = y
        a[k, i] = x
        a[k, j] = y
    a[i, i] = dii
    a[j, j] = djj
    a[i, j] = 0.0
    a[j, i] = 0.0
    for k in range(n):
        qik = qt[i, k]
        qjk = qt[j, k]
        qt[i, k] = cc * qik + ss * qjk
        qt[j, k] = -ss * qik + cc * qjk
    counters[C_ROT] += 18 * n + 12
    counters[C_ROTATIONS] += 1
    return 1


@njit
def rotate_pair(a, qt, i, j, trigger, adversarial, counters):
    return _rotate(a, qt, i, j, trigger, adversarial, counters)


@njit
def scalar_sweep(a, qt, pairs, trigger, adversarial, counters):
    """One pass over an explicit pair sequence; returns rotations applied."""
    rot = 0
    for k in range(pairs.shape[0]):
        rot += _rotate(a, qt, pairs[k, 0], pairs[k, 1], trigger, adversarial, counters)
    return rot


@njit
def scalar_solve(a, qt, order_code, trigger, stop, max_sweeps, adversarial, counters):
    """Full cyclic scalar solve; returns (sweeps, converged)."""
    n = a.shape[0]
    if n < 2 or max_off_abs(a) <= stop:
        return 0, 1
    sweeps = 0
    converged = 0
    while sweeps < max_sweeps:
        rot = 0
        if order_code == ORD_ROW:
            for i in range(n - 1):
                for j in range(i + 1, n):
                    rot += _rotate(a, qt, i, j, trigger, adversarial, counters)
        else:
            for j in range(1, n):
                for i in range(j):
                    rot += _rotate(a, qt, i, j, trigger, adversarial, counters)
        sweeps += 1
        if max_off_abs(a) <= stop:
            converged = 1
            break
        if rot == 0:
            break
    return sweeps, converged


@njit
def _lupp_kernel(a, perm, r0, c0, c1):
    """Packed recursive LUPP on the column range [c0, c1) of rows [r0, m).

    Row swaps act on full rows, which applies the left-half permutation to the
    right half implicitly and folds trailing-block swaps into the assembled L.
    Returns 0 on success, 1 on an exactly zero pivot column.
    """
    m = a.shape[0]
    best = abs(a[r0, c0])
    ip = r0
    for r in range(r0 + 1, m):
        v = abs(a[r, c0])
        if v > best:
            best = v
            ip = r
    if best == 0.0:
        return 1
    if ip != r0:
        for col in range(a.shape[1]):
            tmp = a[r0, col]
            a[r0, col] = a[ip, col]
            a[ip, col] = tmp
        t = perm[r0]
        perm[r0] = perm[ip]
        perm[ip] = t
    nn = c1 - c0
    if nn == 1:
        piv = a[r0, c0]
        for r in range(r0 + 1, m):
            a[r, c0] /= piv
        return 0
    h = nn // 2
    status = _lupp_kernel(a, perm, r0, c0, c0 + h)
    if status != 0:
        return status
    for col in range(c0 + h, c1):
        for ii in range(h):
            acc = a[r0 + ii, col]
            for kk in range(ii):
                acc -= a[r0 + ii, c0 + kk] * a[r0 + kk, col]
            a[r0 + ii, col] = acc
    for r in range(r0 + h, m):
        for col in range(c0 + h, c1):
            acc = a[r, col]
            for kk in range(h):
                acc -= a[r, c0 + kk] * a[r0 + kk, col]
            a[r, col] = acc
    return _lupp_kernel(a, perm, r0 + h, c0 + h, c1)


@njit
def lupp_perm(a):
    """Row permutation from recursive LUPP; destroys a. Returns (perm, status)."""
    m = a.shape[0]
    perm = np.arange(m)
    status = _lupp_kernel(a, perm, 0, 0, a.shape[1])
    return perm, status


@njit
def qrcp_perm(r):
    """Column permutation from pivoted Householder QR; destroys r.

    Same greedy rule as pivoting.householder_qr: downdated squared norms,
    recomputed once they fall below eps times their reference value.
    """
    m, n = r.shape
    k = min(m, n)
    perm = np.arange(n)
    norms2 = np.empty(n)
    ref2 = np.empty(n)
    for col in range(n):
        acc = 0.0
        for row in range(m):
            acc += r[row, col] * r[row, col]
        norms2[col] = acc
        ref2[col] = acc
    eps = 2.220446049250313e-16
    v = np.empty(m)
    for step in range(k):
        pick = step
        best = norms2[step]
        for col in range(step + 1, n):
            if norms2[col] > best:
                best = norms2[col]
                pick = col
        if pick != step:
            for row in range(m):
                tmp = r[row, step]
                r[row, step] = r[row, pick]
                r[row, pick] = tmp
            t = perm[step]
            perm[step] = perm[pick]
            perm[pick] = t
            tf = norms2[step]
            norms2[step] = norms2[pick]
            norms2[pick] = tf
            tf = ref2[step]
            ref2[step] = ref2[pick]
            ref2[pick] = tf
        below = 0.0
        for row in range(step + 1, m):
            below += r[row, step] * r[row, step]
        if below != 0.0:
            norm_x = np.sqrt(below + r[step, step] * r[step, step])
            alpha = -norm_x if r[step, step] >= 0.0 else norm_x
            vnorm2 = 0.0
            for row in range(step, m):
                val = r[row, step]
                if row == step:
                    val -= alpha
                v[row] = val
                vnorm2 += val * val
            vnorm = np.sqrt(vnorm2)
            for row in range(step, m):
                v[row] /= vnorm
            for col in range(step, n):
                dot = 0.0
                for row in range(step, m):
                    dot += v[row] * r[row, col]
                dot *= 2.0
                for row in range(step, m):
                    r[row, col] -= dot * v[row]
            for row in range(step + 1, m):
                r[row, step] = 0.0
            r[step, step] = alpha
        for col in range(step + 1, n):
            upd = norms2[col] - r[step, col] * r[step, col]
            if upd < 0.0:
                upd = 0.0
            norms2[col] = upd
            if upd < eps * ref2[col]:
                acc = 0.0
                for row in range(step + 1, m):
                    acc += r[row, col] * r[row, col]
                norms2[col] = acc
                ref2[col] = acc
    return perm


@njit
def _gather_cross(a, offsets, bi, bj):
    i0 = offsets[bi]
    i1 = offsets[bi + 1]
    j0 = offsets[bj]
    j1 = offsets[bj + 1]
    wi = i1 - i0
    w = wi + (j1 - j0)
    idx = np.empty(w, np.int64)
    for t in range(i1 - i0):
        idx[t] = i0 + t
    for t in range(j1 - j0):
        idx[wi + t] = j0 + t
    sub = np.empty((w, w))
    for r in range(w):
        ar = idx[r]
        for c in range(w):
            sub[r, c] = a[ar, idx[c]]
    return sub, idx, wi


@njit
def _sorted_qhat(qt, sub):
    """Columns of the accumulated rotation reordered by descending diagonal."""
    w = sub.shape[0]
    d = np.empty(w)
    for i in range(w):
        d[i] = -sub[i, i]
    order = np.argsort(d)
    qhat = np.empty((w, w))
    for r in range(w):
        for c in range(w):
            qhat[r, c] = qt[order[c], r]
    return qhat


@njit
def _sub_eig_direct(sub, counters):
    w = sub.shape[0]
    wv, vecs = np.linalg.eigh(sub)
    counters[C_EIG] += _div3round(26 * w * w * w)
    d = np.empty(w)
    for i in range(w):
        d[i] = -wv[i]
    order = np.argsort(d)
    qhat = np.empty((w, w))
    for r in range(w):
        for c in range(w):
            qhat[r, c] = vecs[r, order[c]]
    return qhat


@njit
def _sub_eig_scalar(sub, order_code, trigger, stop, max_sweeps, adversarial, counters):
    w = sub.shape[0]
    qt = np.eye(w)
    scalar_solve(sub, qt, order_code, trigger, stop, max_sweeps, adversarial, counters)
    if adversarial != 0:
        # keep the sabotaged column order: sorting by diagonal would undo the
        # near-swap rotations that make the adversarial mode fail
        qhat = np.empty((w, w))
        for r in range(w):
            for c in range(w):
                qhat[r, c] = qt[c, r]
        return qhat
    return _sorted_qhat(qt, sub)


@njit
def _pivot_fix(qhat, wi, pivot_code, counters):
    """Column-permute a block rotation by LUPP of its leading-rows transpose
    (or QRCP of the leading rows)."""
    w = qhat.shape[0]
    if pivot_code == PIVOT_LUPP:
        work = np.empty((w, wi))
        for r in range(w):
            for c in range(wi):
                work[r, c] = qhat[c, r]
        perm = np.arange(w)
        _lupp_kernel(work, perm, 0, 0, wi)
        counters[C_LUPP] += _div3round(3 * w * wi * wi - wi * wi * wi)
    elif pivot_code == PIVOT_QRCP:
        work = np.empty((wi, w))
        for r in range(wi):
            for c in range(w):
                work[r, c] = qhat[r, c]
        perm = qrcp_perm(work)
        counters[C_QRCP] += _div3round(6 * w * wi * wi - 2 * wi * wi * wi)
    else:
        return qhat
    out = np.empty((w, w))
    for r in range(w):
        for c in range(w):
            out[r, c] = qhat[r, perm[c]]
    return out


@njit
def _apply_block(a, qt, idx, qhat, counters):
    """Two-sided block update of a plus right update of the accumulator.

    qt holds the transposed eigenvector accumulator, so the right-side column
    update becomes a contiguous row update here.  Touched strips are averaged
    with their transpose afterwards to pin symmetry.
    """
    n = a.shape[0]
    w = idx.shape[0]
    qhat_t = np.empty((w, w))
    for r in range(w):
        for c in range(w):
            qhat_t[r, c] = qhat[c, r]
    buf = np.empty((w, n))
    for r in range(w):
        ar = idx[r]
        for c in range(n):
            buf[r, c] = a[ar, c]
    rows = np.dot(qhat_t, buf)
    for r in range(w):
        ar = idx[r]
        for c in range(n):
            a[ar, c] = rows[r, c]
    cbuf = np.empty((n, w))
    for c in range(w):
        ac = idx[c]
        for r in range(n):
            cbuf[r, c] = a[r, ac]
    cols = np.dot(cbuf, qhat)
    for c in range(w):
        ac = idx[c]
        for r in range(n):
            a[r, ac] = cols[r, c]
    for r in range(w):
        ar = idx[r]
        for c in range(n):
            v = 0.5 * (a[ar, c] + a[c, ar])
            a[ar, c] = v
            a[c, ar] = v
    for r in range(w):
        ar = idx[r]
        for c in range(n):
            buf[r, c] = qt[ar, c]
    rows = np.dot(qhat_t, buf)
    for r in range(w):
        ar = idx[r]
        for c in range(n):
            qt[ar, c] = rows[r, c]
    counters[C_MATMUL] += 3 * w * n * (2 * w - 1)


@njit
def block_sweep(a, qt, offsets, pairs, trigger, pivot_code, solver_code, inner_order,
                inner_stop, inner_max_sweeps, adversarial, counters):
    """One blocked sweep over an explicit block-pair sequence; returns the
    number of block rotations applied."""
    applied = 0
    for k in range(pairs.shape[0]):
        sub, idx, wi = _gather_cross(a, offsets, pairs[k, 0], pairs[k, 1])
        counters[C_PAIR_VISITS] += 1
        if max_off_abs(sub) <= trigger:
            continue
        if solver_code == SOLVER_DIRECT:
            qhat = _sub_eig_direct(sub, counters)
        else:
            qhat = _sub_eig_scalar(sub, inner_order, trigger, inner_stop,
                                   inner_max_sweeps, adversarial, counters)
        qhat = _pivot_fix(qhat, wi, pivot_code, counters)
        _apply_block(a, qt, idx, qhat, counters)
        applied += 1
    return applied


@njit
def _cyclic_pairs(count, order_code):
    total = count * (count - 1) // 2
    pairs = np.empty((total, 2), np.int64)
    k = 0
    if order_code == ORD_ROW:
        for i in range(count - 1):
            for j in range(i + 1, count):
                pairs[k, 0] = i
                pairs[k, 1] = j
                k += 1
    else:
        for j in range(1, count):
            for i in range(j):
                pairs[k, 0] = i
                pairs[k, 1] = j
                k += 1
    return pairs


@njit
def recursive_solve(a, qt, fs, level, n_threshold, max_depth, depth, trigger, stop,
                    base_stop, max_sweeps, base_max_sweeps, pivot_code, base_code,
                    order_code, stall_ratio, counters):
    """Full recursive solve with cyclic block ordering; returns 1 on convergence.

    Base cases (small n, oversized blocks, or a depth cap) are solved directly,
    by a cyclic scalar solve or a dense eigendecomposition.  Inner levels stop
    early once a sweep fails to shrink the largest off-diagonal entry below
    stall_ratio times its previous value, since a loose base tolerance would
    otherwise let them spin to max_sweeps with no progress.
    """
    n = a.shape[0]
    if depth > counters[C_MAX_DEPTH]:
        counters[C_MAX_DEPTH] = depth
    li = level if level < fs.shape[0] else fs.shape[0] - 1
    b = int(round(n ** fs[li]))
    if b < 1:
        b = 1
    if n < n_threshold or 2 * b >= n or (max_depth >= 0 and depth >= max_depth):
        counters[C_BASE_SOLVES] += 1
        if base_code == SOLVER_DIRECT and n > 1:
            wv, vecs = np.linalg.eigh(a)
            counters[C_EIG] += _div3round(26 * n * n * n)
            vt = np.empty((n, n))
            for r in range(n):
                for c in range(n):
                    vt[r, c] = vecs[c, r]
            qt[:, :] = np.dot(vt, qt)
            for i in range(n):
                for j in range(n):
                    a[i, j] = 0.0
                a[i, i] = wv[i]
        else:
            scalar_solve(a, qt, order_code, trigger, base_stop, base_max_sweeps, 0, counters)
        return 1 if max_off_abs(a) <= stop else 0

    count = (n + b - 1) // b
    offsets = np.empty(count + 1, np.int64)
    for i in range(count + 1):
        v = i * b
        offsets[i] = v if v < n else n
    pairs = _cyclic_pairs(count, order_code)
    prev = 1.0e300
    sweeps = 0
    converged = 0
    while sweeps < max_sweeps:
        rotated = 0
        for k in range(pairs.shape[0]):
            sub, idx, wi = _gather_cross(a, offsets, pairs[k, 0], pairs[k, 1])
            counters[C_PAIR_VISITS] += 1
            if max_off_abs(sub) <= trigger:
                continue
            w = sub.shape[0]
            sub_qt = np.eye(w)
            recursive_solve(sub, sub_qt, fs, level + 1, n_threshold, max_depth,
                            depth + 1, trigger, stop, base_stop, max_sweeps,
                            base_max_sweeps, pivot_code, base_code, order_code,
                            stall_ratio, counters)
            qhat = _sorted_qhat(sub_qt, sub)
            qhat = _pivot_fix(qhat, wi, pivot_code, counters)
            _apply_block(a, qt, idx, qhat, counters)
            rotated += 1
        sweeps += 1
        cur = max_off_abs(a)
        if cur <= stop:
            converged = 1
            break
        if rotated == 0:
            break
        if depth > 0 and stall_ratio > 0.0 and sweeps >= 2 and cur > stall_ratio * prev:
            counters[C_STALLS] += 1
            break
        prev = cur
    return converged


@njit
def recursive_sweep(a, qt, offsets, pairs, fs, n_threshold, max_depth, trigger, stop,
                    base_stop, max_sweeps, base_max_sweeps, pivot_code, base_code,
                    order_code, stall_ratio, counters):
    """One top-level recursive sweep over an explicit block-pair sequence."""
    rotated = 0
    for k in range(pairs.shape[0]):
        sub, idx, wi = _gather_cross(a, offsets, pairs[k, 0], pairs[k, 1])
        counters[C_PAIR_VISITS] += 1
        if max_off_abs(sub) <= trigger:
            continue
        w = sub.shape[0]
        sub_qt = np.eye(w)
        recursive_solve(sub, sub_qt, fs, 1, n_threshold, max_depth, 1, trigger, stop,
                        base_stop, max_sweeps, base_max_sweeps, pivot_code, base_code,
                        order_code, stall_ratio, counters)
        qhat = _sorted_qhat(sub_qt, sub)
        qhat = _pivot_fix(qhat, wi, pivot_code, counters)
        _apply_block(a, qt, idx, qhat, counters)
        rotated += 1
    return rotated
