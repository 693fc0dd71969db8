"""Dense symmetric-matrix utilities: convergence metrics, block views, matrix I/O."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

BINARY_MAGIC = b"JACM"


def as_work_matrix(a) -> np.ndarray:
    """Return a C-contiguous float64 copy suitable for in-place solving."""
    m = np.array(a, dtype=np.float64, order="C", copy=True)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Force exact symmetry in place by averaging with the transpose."""
    a += a.T
    a *= 0.5
    return a


def require_symmetric(a: np.ndarray, rtol: float = 1e-8) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not symmetric")


def off_diag_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part, the classical convergence measure."""
    b = np.asarray(a, dtype=np.float64).copy()
    np.fill_diagonal(b, 0.0)
    return float(np.linalg.norm(b))


def max_off_diag(a: np.ndarray) -> tuple[float, int, int]:
    """Largest |off-diagonal| entry and its (i, j), i < j, first hit in row-major order.

    Raises ValueError for 1x1 matrices, which have no off-diagonal part.
    """
    n = a.shape[0]
    if n < 2:
        raise ValueError("no off-diagonal")
    b = np.abs(np.triu(a, 1))
    flat = int(np.argmax(b))
    i, j = divmod(flat, n)
    return float(b[i, j]), i, j


def max_abs(a: np.ndarray) -> float:
    return float(np.abs(a).max(initial=0.0))


@dataclass(frozen=True)
class BlockPartition:
    """Partition of 0..n-1 into contiguous blocks of width b (last block may be ragged)."""

    n: int
    b: int

    def __post_init__(self):
        if self.n < 1 or self.b < 1:
            raise ValueError("n and b must be positive")

    @property
    def count(self) -> int:
        return -(-self.n // self.b)

    def start(self, i: int) -> int:
        return i * self.b

    def stop(self, i: int) -> int:
        return min((i + 1) * self.b, self.n)

    def width(self, i: int) -> int:
        return self.stop(i) - self.start(i)

    def indices(self, i: int) -> np.ndarray:
        return np.arange(self.start(i), self.stop(i))

    def offsets(self) -> np.ndarray:
        """Block boundaries as an int64 array of length count + 1."""
        edges = np.minimum(np.arange(self.count + 1) * self.b, self.n)
        return edges.astype(np.int64)


def gather_cross(a: np.ndarray, part: BlockPartition, bi: int, bj: int) -> np.ndarray:
    """Copy the symmetric cross submatrix of block rows/columns bi and bj."""
    if not 0 <= bi < bj < part.count:
        raise ValueError("invalid block pair")
    idx = np.concatenate([part.indices(bi), part.indices(bj)])
    return a[np.ix_(idx, idx)].copy()


def scatter_cross(a: np.ndarray, part: BlockPartition, bi: int, bj: int, sub: np.ndarray) -> None:
    """Write a cross submatrix back into blocks (bi,bi), (bi,bj), (bj,bi), (bj,bj)."""
    if not 0 <= bi < bj < part.count:
        raise ValueError("invalid block pair")
    idx = np.concatenate([part.indices(bi), part.indices(bj)])
    w = idx.size
    if sub.shape != (w, w):
        raise ValueError(f"cross block must be {w}x{w}, got {sub.shape}")
    a[np.ix_(idx, idx)] = sub


@dataclass
class HistoryRow:
    sweep: int
    max_offdiag: float
    offdiag_fro: float
    cum_flops: int
    rotations: int


@dataclass
class ConvergenceState:
    """Per-solve convergence record; one history row is appended per completed sweep.

    The recursion statistics stay zero for the non-recursive solvers.
    """

    initial_max_off_diag: float
    tolerance: float
    converged: bool = False
    sweeps: int = 0
    history: list[HistoryRow] = field(default_factory=list)
    max_depth_reached: int = 0
    base_case_solves: int = 0
    inner_stalls: int = 0

    @property
    def threshold(self) -> float:
        return self.tolerance * self.initial_max_off_diag

    def record(self, max_offdiag: float, offdiag_fro: float, cum_flops: int, rotations: int) -> None:
        self.sweeps += 1
        self.history.append(HistoryRow(self.sweeps, max_offdiag, offdiag_fro, cum_flops, rotations))


def write_matrix_text(path, a: np.ndarray) -> None:
    """Plain-text format: header line with the dimensions, then one row per line.

    Square matrices write a single integer "n"; rectangular ones write "m n".
    """
    a = np.asarray(a, dtype=np.float64)
    rows, cols = a.shape
    with open(path, "w") as fh:
        fh.write(f"{rows}\n" if rows == cols else f"{rows} {cols}\n")
        for r in range(rows):
            fh.write(" ".join(f"{v:.17g}" for v in a[r]) + "\n")


def read_matrix_text(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) == 1:
            rows = cols = int(header[0])
        elif len(header) == 2:
            rows, cols = int(header[0]), int(header[1])
        else:
            raise ValueError(f"{path}: bad header {header!r}")
        data = np.loadtxt(fh, dtype=np.float64, ndmin=2)
    if data.shape != (rows, cols):
        raise ValueError(f"{path}: expected {rows}x{cols}, got {data.shape}")
    return data


def write_matrix_binary(path, a: np.ndarray) -> None:
    """Binary round-trip format: magic "JACM", u64 LE rows/cols, f64 LE row-major data."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<QQ", a.shape[0], a.shape[1]))
        fh.write(a.astype("<f8").tobytes())


def read_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BINARY_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        buf = fh.read(8 * rows * cols)
    if len(buf) != 8 * rows * cols:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(buf, dtype="<f8").reshape(rows, cols).astype(np.float64)


def read_matrix(path) -> np.ndarray:
    """Dispatch on the binary magic, falling back to the text format."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    return read_matrix_binary(path) if magic == BINARY_MAGIC else read_matrix_text(path)
