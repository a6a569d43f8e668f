"""Synthetic sparse SPSD matrices with a prescribed spectrum.

A diagonal matrix holding the requested eigenvalues is scrambled by random
Givens similarity transforms ``A <- G A G^T``. Each rotation mixes two rows
and the matching columns, so the fill grows step by step and stops once the
off-diagonal density reaches the target. Orthogonal similarity keeps the
spectrum (up to rounding) and the result is symmetrized exactly at the end.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

SPECTRUM_KINDS = ("uniform", "geometric", "explicit")
_GEN_STREAM = 0x67656E


@dataclass(frozen=True)
class SpectrumSpec:
    """Recipe for a synthetic SPSD matrix.

    ``uniform`` spaces ``n`` eigenvalues evenly over ``[lambda_min, lambda_max]``;
    ``geometric`` spaces them geometrically from ``lambda_max`` down to
    ``lambda_max / kappa``; ``explicit`` takes ``values`` verbatim. ``zeros``
    then replaces the smallest eigenvalues by exact zeros (rank deficiency).
    """

    n: int
    kind: str = "uniform"
    lambda_min: float = 1.0
    lambda_max: float = 10.0
    kappa: float = 10.0
    values: tuple = ()
    zeros: int = 0
    density: float = 0.1
    seed: int = 0

    def eigenvalues(self) -> np.ndarray:
        """Prescribed eigenvalues, sorted descending."""
        if self.kind not in SPECTRUM_KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}; expected one of {SPECTRUM_KINDS}")
        if self.kind == "explicit":
            lam = np.asarray(self.values, dtype=np.float64)
            if lam.size != self.n:
                raise ValueError(f"explicit spectrum has {lam.size} values, expected n={self.n}")
        elif self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        elif self.kind == "uniform":
            if not 0 <= self.lambda_min <= self.lambda_max:
                raise ValueError("uniform spectrum needs 0 <= lambda_min <= lambda_max")
            lam = np.linspace(self.lambda_max, self.lambda_min, self.n)
        else:
            if self.kappa < 1 or self.lambda_max <= 0:
                raise ValueError("geometric spectrum needs kappa >= 1 and lambda_max > 0")
            frac = np.arange(self.n) / max(self.n - 1, 1)
            lam = self.lambda_max * self.kappa ** (-frac)
            lam[-1] = self.lambda_max / self.kappa
        if not np.all(np.isfinite(lam)) or np.any(lam < 0):
            raise ValueError("spectrum must consist of finite non-negative eigenvalues")
        if not 0 <= self.zeros <= self.n:
            raise ValueError(f"zeros must lie in [0, n], got {self.zeros}")
        lam = np.sort(lam)[::-1].copy()
        if self.zeros:
            lam[self.n - self.zeros:] = 0.0
        return lam


def _offdiag_nnz_touching(A, i, j) -> int:
    """Off-diagonal nonzeros in rows/columns ``i`` and ``j`` of a symmetric pattern."""
    rows = int(np.count_nonzero(A[i])) + int(np.count_nonzero(A[j]))
    rows -= int(A[i, i] != 0) + int(A[j, j] != 0)
    block = int(A[i, j] != 0) + int(A[j, i] != 0)
    return 2 * rows - block


def make_spsd_matrix(spec: SpectrumSpec):
    """Build the matrix described by ``spec``.

    Returns
    -------
    A : scipy.sparse.csr_matrix
        Exactly symmetric matrix with the prescribed spectrum.
    eigenvalues : ndarray
        The prescribed eigenvalues, descending.
    """
    lam = spec.eigenvalues()
    n = spec.n
    if not 0 < spec.density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {spec.density}")
    rng = np.random.default_rng([int(spec.seed) & ((1 << 64) - 1), _GEN_STREAM])
    A = np.diag(lam[rng.permutation(n)])

    if n < 2 or spec.density < 1.0 / n:
        if n >= 2:
            warnings.warn(f"density {spec.density:g} is below 1/n; emitting a diagonal matrix", stacklevel=2)
        return sp.csr_matrix(A), lam

    target = spec.density * n * (n - 1)
    offdiag = 0
    max_rotations = 40 * n * max(1, math.ceil(math.log2(n))) + 100
    for _ in range(max_rotations):
        if offdiag >= target:
            break
        i, j = rng.choice(n, size=2, replace=False)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        c, s = math.cos(theta), math.sin(theta)
        before = _offdiag_nnz_touching(A, i, j)
        ri, rj = A[i].copy(), A[j].copy()
        A[i], A[j] = c * ri - s * rj, s * ri + c * rj
        ci, cj = A[:, i].copy(), A[:, j].copy()
        A[:, i], A[:, j] = c * ci - s * cj, s * ci + c * cj
        offdiag += _offdiag_nnz_touching(A, i, j) - before
    A = 0.5 * (A + A.T)
    return sp.csr_matrix(A), lam
