import math

import numpy as np
import pytest
import scipy.sparse as sp

from schattenest.oracle import (
    DENSE_LIMIT,
    eigenvalues_symmetric,
    jacobi_eigenvalues,
    schatten_exact,
    schatten_exact_general,
)


def random_symmetric(n, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    return 0.5 * (A + A.T)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
class TestEigenvalues:
    def test_diagonal(self, method):
        np.testing.assert_allclose(eigenvalues_symmetric(np.diag([3.0, 1.0, 2.0]), method).eigenvalues, [3, 2, 1])

    def test_two_by_two(self, method):
        lam = eigenvalues_symmetric(np.array([[2.0, 1.0], [1.0, 2.0]]), method).eigenvalues
        np.testing.assert_allclose(lam, [3.0, 1.0], rtol=1e-14)

    def test_trace_and_frobenius(self, method):
        A = random_symmetric(20, 1)
        spec = eigenvalues_symmetric(A, method)
        assert spec.n == 20
        assert np.all(np.diff(spec.eigenvalues) <= 0)
        lam = spec.eigenvalues
        assert math.fsum(lam) == pytest.approx(np.trace(A), rel=1e-9, abs=1e-9)
        assert math.fsum(lam**2) == pytest.approx(np.sum(A * A), rel=1e-9)

    def test_rejects_asymmetric(self, method):
        with pytest.raises(ValueError, match="symmetric"):
            eigenvalues_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]), method)


def test_jacobi_agrees_with_lapack():
    for seed in range(5):
        A = random_symmetric(30, seed)
        np.testing.assert_allclose(
            np.sort(jacobi_eigenvalues(A)), np.linalg.eigvalsh(A), atol=1e-11 * np.linalg.norm(A)
        )


def test_jacobi_residual():
    A = random_symmetric(15, 3)
    lam = jacobi_eigenvalues(A, tol=1e-13)
    # eigenvalues of the rotated matrix match to the requested off-diagonal level
    assert np.max(np.abs(np.sort(lam) - np.linalg.eigvalsh(A))) <= 1e-11 * np.linalg.norm(A)


def test_sparse_input():
    assert eigenvalues_symmetric(sp.diags([1.0, 5.0])).eigenvalues.tolist() == [5.0, 1.0]


def test_dense_limit():
    with pytest.raises(ValueError, match="dense limit"):
        eigenvalues_symmetric(sp.eye(DENSE_LIMIT + 1))


class TestSchattenExact:
    def test_examples(self):
        assert schatten_exact(np.diag([1.0, 2.0, 3.0]), 2) == pytest.approx(14.0, rel=1e-14)
        assert schatten_exact(np.eye(7), 3.3) == pytest.approx(7.0, rel=1e-14)
        assert schatten_exact(np.diag([1.0, 2.0, 3.0]), 0.5) == pytest.approx(4.146264, abs=1e-6)
        assert schatten_exact(np.diag([1.0, 2.0, 3.0]), 0.5) == pytest.approx(1 + math.sqrt(2) + math.sqrt(3), rel=1e-14)

    def test_p_one_is_trace(self):
        X = np.random.default_rng(0).standard_normal((25, 25))
        A = X @ X.T
        assert schatten_exact(A, 1) == pytest.approx(np.trace(A), rel=1e-9)

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="not PSD"):
            schatten_exact(np.diag([1.0, -0.5]), 2)

    def test_clamps_rounding_negatives(self):
        assert schatten_exact(np.diag([1.0, -1e-12]), 0.5) == 1.0

    def test_monotone_in_eigenvalues(self):
        rng = np.random.default_rng(5)
        Q, _ = np.linalg.qr(rng.standard_normal((10, 10)))
        lam = rng.uniform(0.1, 3, 10)
        for p in (0.5, 1.5, 3):
            base = schatten_exact(Q @ np.diag(lam) @ Q.T, p)
            bumped = lam.copy()
            bumped[3] += 0.1
            assert schatten_exact(Q @ np.diag(bumped) @ Q.T, p) > base

    def test_general_examples(self):
        assert schatten_exact_general(np.array([[0.0, 2.0], [0.0, 0.0]]), 3) == pytest.approx(8.0, rel=1e-14)
        Q, _ = np.linalg.qr(np.random.default_rng(2).standard_normal((4, 4)))
        assert schatten_exact_general(Q, 7) == pytest.approx(4.0, rel=1e-12)

    def test_general_p2_is_frobenius(self):
        B = np.random.default_rng(8).standard_normal((10, 10))
        assert schatten_exact_general(B, 2) == pytest.approx(np.sum(B * B), rel=1e-9)

    def test_general_matches_svd(self):
        B = np.random.default_rng(9).standard_normal((12, 12))
        sv = np.linalg.svd(B, compute_uv=False)
        assert schatten_exact_general(B, 3.0) == pytest.approx(np.sum(sv**3), rel=1e-9)
