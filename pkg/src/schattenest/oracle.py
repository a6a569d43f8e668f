"""Exact Schatten norms of desk-scale matrices by dense eigendecomposition.

This is the ground truth the randomized estimators are checked against.
Two eigensolvers are available: LAPACK's symmetric driver (default) and a
plain cyclic Jacobi iteration, kept as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 4096
"""Largest dimension accepted by the dense routines."""

NEGATIVE_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def _dense(A) -> np.ndarray:
    M = A.toarray() if sp.issparse(A) else np.array(A, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > DENSE_LIMIT:
        raise ValueError(f"dimension {M.shape[0]} exceeds the dense limit of {DENSE_LIMIT}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    return M


def _offdiag_norm(M: np.ndarray) -> float:
    return math.sqrt(2.0) * float(np.linalg.norm(M[np.triu_indices_from(M, 1)]))


def jacobi_eigenvalues(A, tol: float = 1e-13, max_sweeps: int = 30) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by the cyclic Jacobi method.

    Sweeps over all ``(p, q)`` pairs, annihilating each off-diagonal entry
    with a plane rotation, until the off-diagonal Frobenius norm falls to
    ``tol * ||A||_F``. Returned unsorted (diagonal order).
    """
    M = np.array(A, dtype=np.float64)
    n = M.shape[0]
    fro = np.linalg.norm(M)
    if fro == 0.0 or n == 1:
        return np.diag(M).copy()
    for _ in range(max_sweeps):
        if _offdiag_norm(M) <= tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if apq == 0.0:
                    continue
                diff = M[q, q] - M[p, p]
                if abs(apq) <= 1e-18 * (abs(M[p, p]) + abs(M[q, q])):
                    # below rounding of the diagonal; drop it
                    M[p, q] = M[q, p] = 0.0
                    continue
                if abs(diff) > 1e100 * abs(apq):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp, colq = M[:, p].copy(), M[:, q].copy()
                M[:, p] = c * colp - s * colq
                M[:, q] = s * colp + c * colq
                rowp, rowq = M[p, :].copy(), M[q, :].copy()
                M[p, :] = c * rowp - s * rowq
                M[q, :] = s * rowp + c * rowq
    else:
        if _offdiag_norm(M) > 1e-11 * fro:
            raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.diag(M).copy()


def eigenvalues_symmetric(A, method: str = "lapack") -> Spectrum:
    """Eigenvalues of a symmetric matrix, sorted descending.

    Parameters
    ----------
    A : array-like or sparse matrix
        Symmetric to within ``1e-12`` relative (max-entry) tolerance.
    method : {"lapack", "jacobi"}

    Returns
    -------
    Spectrum
    """
    M = _dense(A)
    scale = np.abs(M).max(initial=0.0)
    if np.abs(M - M.T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    M = 0.5 * (M + M.T)
    if method == "lapack":
        lam = np.linalg.eigvalsh(M)
    elif method == "jacobi":
        lam = jacobi_eigenvalues(M)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'lapack' or 'jacobi'")
    return Spectrum(np.sort(lam)[::-1].copy())


def _psd_eigenvalues(lam: np.ndarray) -> np.ndarray:
    top = float(np.max(np.abs(lam), initial=0.0))
    if lam.size and lam.min() < -NEGATIVE_TOL * top:
        raise ValueError(f"input not PSD: eigenvalue {lam.min():.3e} below -{NEGATIVE_TOL:g} * {top:.3e}")
    return np.clip(lam, 0.0, None)


def schatten_exact(A, p: float, method: str = "lapack") -> float:
    """``||A||_p**p = sum_i lambda_i**p`` for an SPSD matrix.

    >>> schatten_exact(np.diag([1.0, 2.0, 3.0]), 2)
    14.0
    """
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p!r}")
    lam = _psd_eigenvalues(eigenvalues_symmetric(A, method).eigenvalues)
    return math.fsum(lam**p)


def schatten_exact_general(B, p: float, method: str = "lapack") -> float:
    """``||B||_p**p = sum_i mu_i**(p/2)`` with ``mu`` the eigenvalues of ``B^T B``."""
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p!r}")
    M = _dense(B)
    G = M.T @ M
    G = 0.5 * (G + G.T)
    mu = eigenvalues_symmetric(G, method).eigenvalues
    return math.fsum(np.clip(mu, 0.0, None) ** (p / 2.0))
