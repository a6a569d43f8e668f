"""Sparse storage, matrix-free operators and Matrix Market I/O.

Square sparse matrices are held as :class:`scipy.sparse.csr_matrix` in
canonical form (sorted column indices, no duplicates, float64). Operators
subclass :class:`scipy.sparse.linalg.LinearOperator` so they plug into the
rest of the SciPy ecosystem, and carry a ``cost_hint`` (flops per apply).
"""
from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator


class MatrixMarketError(ValueError):
    """Raised when a Matrix Market file cannot be parsed."""


def as_csr(A) -> sp.csr_matrix:
    """Convert a square array-like or sparse matrix to canonical float64 CSR."""
    if sp.issparse(A):
        M = sp.csr_matrix(A, dtype=np.float64, copy=True)
    else:
        arr = np.asarray(A, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got an array with ndim={arr.ndim}")
        M = sp.csr_matrix(arr)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M.data)):
        raise ValueError("matrix contains non-finite entries")
    M.sum_duplicates()
    M.sort_indices()
    return M


def check_csr_invariants(M: sp.csr_matrix) -> None:
    """Assert the structural CSR invariants; raises ``ValueError`` on violation."""
    n = M.shape[0]
    ptr, ind = M.indptr, M.indices
    if ptr[0] != 0 or ptr[-1] != M.nnz or np.any(np.diff(ptr) < 0):
        raise ValueError("row offsets must be non-decreasing from 0 to nnz")
    if ind.size and (ind.min() < 0 or ind.max() >= n):
        raise ValueError("column index out of range")
    for i in range(n):
        row = ind[ptr[i]:ptr[i + 1]]
        if row.size > 1 and np.any(np.diff(row) <= 0):
            raise ValueError(f"column indices of row {i} are not strictly increasing")


def is_symmetric(M, rtol: float = 1e-12) -> bool:
    """True when ``|M - M^T|`` is within ``rtol * max|M|`` entrywise."""
    if sp.issparse(M):
        diff = abs(M - M.T)
        dmax = diff.max() if diff.nnz else 0.0
        scale = abs(M).max() if M.nnz else 0.0
    else:
        M = np.asarray(M)
        dmax = np.abs(M - M.T).max(initial=0.0)
        scale = np.abs(M).max(initial=0.0)
    return bool(dmax <= rtol * scale)


class _CostedOperator(LinearOperator):
    """Square operator defined by a block-apply callable."""

    def __init__(self, n, apply_block, cost_hint, name=""):
        self._apply_block = apply_block
        self.cost_hint = int(cost_hint)
        self.name = name
        super().__init__(dtype=np.float64, shape=(n, n))

    @property
    def dim(self) -> int:
        return self.shape[0]

    def _matvec(self, x):
        return self._apply_block(np.asarray(x, dtype=np.float64).reshape(-1))

    def _matmat(self, X):
        return self._apply_block(np.asarray(X, dtype=np.float64))

    def _adjoint(self):
        # every operator built here is symmetric
        return self

    def __repr__(self):
        return f"<{self.dim}x{self.dim} {self.name or 'operator'} cost_hint={self.cost_hint}>"


def aslinearoperator(A) -> _CostedOperator:
    """Wrap a matrix (sparse or dense) or an existing operator."""
    if isinstance(A, _CostedOperator):
        return A
    if isinstance(A, LinearOperator):
        n, n2 = A.shape
        if n != n2:
            raise ValueError(f"operator must be square, got shape {A.shape}")
        def apply(X):
            return A.matmat(X) if X.ndim == 2 else A.matvec(X)

        return _CostedOperator(n, apply, 2 * n * n, name=type(A).__name__)
    if sp.issparse(A):
        M = as_csr(A)
        return _CostedOperator(M.shape[0], M.dot, 2 * M.nnz, name="csr")
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square and 2-D, got shape {M.shape}")
    return _CostedOperator(M.shape[0], M.dot, 2 * M.size, name="dense")


def identity_operator(n: int) -> _CostedOperator:
    return _CostedOperator(n, lambda X: np.array(X, dtype=np.float64, copy=True), n, name="identity")


def matvec(op, v) -> np.ndarray:
    """Apply ``op`` to ``v`` after validating length and finiteness.

    Examples
    --------
    >>> matvec(aslinearoperator(np.diag([1.0, 2.0, 3.0])), [1, 1, 1])
    array([1., 2., 3.])
    """
    op = aslinearoperator(op)
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != op.dim:
        raise ValueError(f"dimension mismatch: operator is {op.dim}x{op.dim}, vector has shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("input vector contains non-finite entries")
    return op.matvec(v)


def residual_operator(A, alpha: float) -> _CostedOperator:
    """Operator ``v -> v - (A v) / alpha``, i.e. ``I - A/alpha`` without forming it."""
    alpha = float(alpha)
    if not (alpha > 0 and np.isfinite(alpha)):
        raise ValueError(f"alpha must be a finite positive number, got {alpha!r}")
    inner = aslinearoperator(A)

    def apply(X):
        return X - inner.dot(X) / alpha

    n = inner.dim
    nnz = A.nnz if sp.issparse(A) else inner.cost_hint // 2
    return _CostedOperator(n, apply, nnz + n, name="residual")


def gram_operator(B) -> _CostedOperator:
    """Operator ``v -> B^T (B v)`` computed as two sparse products."""
    B = as_csr(B)
    Bt = B.T.tocsr()

    def apply(X):
        return Bt.dot(B.dot(X))

    return _CostedOperator(B.shape[0], apply, 2 * B.nnz, name="gram")


# Matrix Market ---------------------------------------------------------------

_BANNER = "%%matrixmarket"


def load_matrix_market(path) -> sp.csr_matrix:
    """Read a real coordinate Matrix Market file into canonical CSR.

    ``symmetric`` files are expanded to full storage, duplicate coordinates
    are summed and 1-based indices become 0-based. Errors name the file and
    line number.
    """
    path = os.fspath(path)
    with open(path, encoding="ascii", errors="replace") as fh:
        lines = fh.readlines()

    def fail(lineno, msg):
        raise MatrixMarketError(f"{path}:{lineno}: {msg}")

    if not lines:
        fail(1, "empty file")
    header = lines[0].strip().split()
    if len(header) != 5 or header[0].lower() != _BANNER:
        fail(1, f"missing '%%MatrixMarket' banner: {lines[0].strip()!r}")
    obj, fmt, field, symmetry = (h.lower() for h in header[1:])
    if obj != "matrix":
        fail(1, f"unsupported object {obj!r}")
    if fmt != "coordinate":
        fail(1, f"unsupported format {fmt!r}; only 'coordinate' is read")
    if field not in ("real", "integer", "double"):
        fail(1, f"unsupported field {field!r}; only real-valued matrices are read")
    if symmetry not in ("general", "symmetric"):
        fail(1, f"unsupported symmetry {symmetry!r}; expected 'general' or 'symmetric'")

    body = ((no, ln.strip()) for no, ln in enumerate(lines[1:], start=2))
    body = [(no, ln) for no, ln in body if ln and not ln.startswith("%")]
    if not body:
        fail(len(lines), "missing size line")

    size_no, size_line = body[0]
    try:
        nrows, ncols, nnz = (int(tok) for tok in size_line.split())
    except ValueError:
        fail(size_no, f"malformed size line {size_line!r}")
    if nrows != ncols:
        fail(size_no, f"matrix must be square, got {nrows}x{ncols}")
    if nrows < 0 or nnz < 0:
        fail(size_no, "negative size")
    entries = body[1:]
    if len(entries) != nnz:
        fail(entries[-1][0] if entries else size_no,
             f"expected {nnz} entries, found {len(entries)}")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    for k, (no, ln) in enumerate(entries):
        tok = ln.split()
        if len(tok) != 3:
            fail(no, f"expected 'row col value', got {ln!r}")
        try:
            i, j, v = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            fail(no, f"cannot parse entry {ln!r}")
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            fail(no, f"index ({i}, {j}) outside a {nrows}x{ncols} matrix")
        if not np.isfinite(v):
            fail(no, f"non-finite value {tok[2]!r}")
        rows[k], cols[k], vals[k] = i - 1, j - 1, v

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate((rows, cols[off])),
                            np.concatenate((cols, rows[off])),
                            np.concatenate((vals, vals[off])))
    M = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsr()
    M.sum_duplicates()
    M.sort_indices()
    return M


def save_matrix_market(path, A, symmetric: bool = False, comment: str | None = None) -> None:
    """Write ``A`` as a real coordinate Matrix Market file.

    With ``symmetric=True`` only the lower triangle is written and ``A`` must
    be exactly symmetric.
    """
    M = as_csr(A)
    if symmetric and (M != M.T).nnz:
        raise ValueError("symmetric=True requires an exactly symmetric matrix")
    C = M.tocoo()
    rows, cols, vals = C.row, C.col, C.data
    if symmetric:
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    order = np.lexsort((rows, cols))
    kind = "symmetric" if symmetric else "general"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{M.shape[0]} {M.shape[1]} {len(vals)}\n")
        for k in order:
            fh.write(f"{rows[k] + 1} {cols[k] + 1} {float(vals[k])!r}\n")
