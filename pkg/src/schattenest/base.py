"""Scikit-learn style estimators wrapping the functional API.

``fit`` takes the matrix whose norm is wanted; the learned attributes
(trailing underscore) hold the estimate and the resolved run parameters.
Hyper-parameters follow the usual conventions, so ``get_params``,
``set_params`` and ``sklearn.base.clone`` work as expected.

>>> import numpy as np
>>> est = SchattenNormEstimator(p=2, eps=0.3, random_state=1).fit(np.eye(8))
>>> round(est.norm_ ** 2) in range(5, 12)
True
"""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_scalar

from . import oracle
from .estimator import schatten_general, schatten_kappa, schatten_plain
from .series import RIGOR_MODES

_MASK64 = (1 << 64) - 1


def check_square_matrix(X):
    """Validate ``X`` as a finite, square, float64 dense array or CSR matrix."""
    X = check_array(X, accept_sparse="csr", dtype=np.float64, ensure_min_samples=1,
                    ensure_min_features=1, ensure_all_finite=True)
    if X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    return X


def check_seed(random_state) -> int:
    """Turn ``random_state`` into the 64-bit master seed of the probe source.

    Integers are used as is; ``None`` draws fresh OS entropy; a NumPy
    ``Generator`` or ``RandomState`` supplies one 64-bit draw.
    """
    if random_state is None:
        return int(np.random.SeedSequence().entropy) & _MASK64
    if isinstance(random_state, numbers.Integral):
        return int(random_state) & _MASK64
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**63))
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(0, 2**63 - 1, dtype=np.int64))
    raise ValueError(f"random_state must be None, an int or a NumPy generator, got {random_state!r}")


class SchattenNormEstimator(BaseEstimator):
    """Randomized ``(1 +/- eps)`` estimate of the Schatten p-norm of a matrix.

    Parameters
    ----------
    p : float, default=2.0
        Schatten exponent.
    eps : float, default=0.1
        Target relative accuracy of ``||A||_p**p``.
    delta : float, default=0.1
        Allowed failure probability.
    kappa : float, optional
        Bound on ``lambda_1 / lambda_n``. Selects the condition-number aware
        algorithm, which needs a nonsingular input.
    alpha : float, optional
        Known bound ``lambda_1 <= alpha <= 6 lambda_1``; skips power iteration.
    general : bool, default=False
        Treat the input as an arbitrary square matrix ``B`` and estimate
        ``||B||_p**p`` via ``B^T B``.
    rigor : {"practical", "rigorous"}, default="practical"
    random_state : int, Generator or None, default=0
    n_jobs : int, optional
        Threads for the probe loop; the result does not depend on it.

    Attributes
    ----------
    estimate_ : float
        Raw estimate of ``||A||_p**p`` (may be negative at tiny budgets).
    norm_ : float
        ``max(estimate_, 0) ** (1/p)``.
    t_, m_ : int
        Probe count and truncation order used.
    alpha_ : float
        Spectral upper bound used.
    result_ : SchattenEstimate
        Full record including diagnostics.
    n_features_in_ : int
    """

    def __init__(self, p=2.0, eps=0.1, delta=0.1, kappa=None, alpha=None, general=False,
                 rigor="practical", random_state=0, n_jobs=None):
        self.p = p
        self.eps = eps
        self.delta = delta
        self.kappa = kappa
        self.alpha = alpha
        self.general = general
        self.rigor = rigor
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _validate_params(self):
        check_scalar(self.p, "p", numbers.Real, min_val=0, include_boundaries="neither")
        check_scalar(self.eps, "eps", numbers.Real, min_val=0, max_val=1, include_boundaries="neither")
        check_scalar(self.delta, "delta", numbers.Real, min_val=0, max_val=1, include_boundaries="neither")
        if self.kappa is not None:
            check_scalar(self.kappa, "kappa", numbers.Real, min_val=1)
            if self.general:
                raise ValueError("kappa and general=True cannot be combined")
        if self.alpha is not None:
            check_scalar(self.alpha, "alpha", numbers.Real, min_val=0, include_boundaries="neither")
        if self.rigor not in RIGOR_MODES:
            raise ValueError(f"rigor must be one of {RIGOR_MODES}, got {self.rigor!r}")

    def fit(self, X, y=None):
        """Estimate the norm of ``X``. ``y`` is ignored."""
        self._validate_params()
        X = check_square_matrix(X)
        kwargs = dict(eps=self.eps, delta=self.delta, seed=check_seed(self.random_state),
                      rigor=self.rigor, alpha=self.alpha, n_jobs=self.n_jobs)
        if self.general:
            result = schatten_general(X, self.p, **kwargs)
        elif self.kappa is not None:
            result = schatten_kappa(X, self.p, self.kappa, **kwargs)
        else:
            result = schatten_plain(X, self.p, **kwargs)
        self.result_ = result
        self.estimate_ = result.value_p_power
        self.norm_ = result.value_norm
        self.t_ = result.params.t
        self.m_ = result.params.m
        self.alpha_ = result.params.alpha
        self.n_features_in_ = X.shape[1]
        return self

    def score(self, X, y=None):
        """Negative relative error of ``estimate_`` against the exact value of ``X``."""
        check_is_fitted(self)
        exact = ExactSchattenNorm(p=self.p, general=self.general).fit(X).value_
        if exact == 0:
            return -abs(self.estimate_)
        return -abs(self.estimate_ - exact) / exact


class ExactSchattenNorm(BaseEstimator):
    """Exact ``||A||_p**p`` by dense eigendecomposition (desk-scale reference).

    Attributes
    ----------
    value_ : float
        ``||A||_p**p``.
    norm_ : float
        ``value_ ** (1/p)``.
    eigenvalues_ : ndarray
        Spectrum of ``A`` (or of ``B^T B`` when ``general=True``), descending.
    """

    def __init__(self, p=2.0, general=False, method="lapack"):
        self.p = p
        self.general = general
        self.method = method

    def fit(self, X, y=None):
        check_scalar(self.p, "p", numbers.Real, min_val=0, include_boundaries="neither")
        X = check_square_matrix(X)
        if X.shape[0] > oracle.DENSE_LIMIT:
            raise ValueError(f"dimension {X.shape[0]} exceeds the dense limit of {oracle.DENSE_LIMIT}")
        if self.general:
            self.value_ = oracle.schatten_exact_general(X, self.p, self.method)
            dense = X.toarray() if hasattr(X, "toarray") else X
            gram = dense.T @ dense
            self.eigenvalues_ = oracle.eigenvalues_symmetric(0.5 * (gram + gram.T), self.method).eigenvalues
        else:
            self.value_ = oracle.schatten_exact(X, self.p, self.method)
            self.eigenvalues_ = oracle.eigenvalues_symmetric(X, self.method).eigenvalues
        self.norm_ = self.value_ ** (1.0 / self.p)
        self.n_features_in_ = X.shape[1]
        return self
