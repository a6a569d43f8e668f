"""Randomized Schatten-norm estimators for SPSD matrices.

With ``alpha`` an upper bound on the top eigenvalue and
``C = I - A/alpha`` (spectrum inside ``[0, 1]``),

    tr A**p = alpha**p * tr (I - C)**p = alpha**p * (n - tr h(C)),

where ``h(x) = 1 - (1 - x)**p``. Truncating ``h`` after ``m`` terms and
estimating ``tr h_tilde(C)`` with Hutchinson's estimator gives

* :func:`schatten_plain` -- no conditioning assumption; a diagonal shift
  ``beta_m`` keeps the probed matrix PSD,
* :func:`schatten_kappa` -- for nonsingular ``A`` with known condition-number
  bound ``kappa``; far smaller ``m`` when ``kappa`` is moderate,
* :func:`schatten_general` -- any square ``B``, through the implicit Gram
  operator ``B^T B`` and exponent ``p / 2``.

Cost is ``t * m'`` operator applications, where ``m' <= m`` drops the
vanishing terms for integer ``p``.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import series
from .linop import aslinearoperator, as_csr, gram_operator, is_symmetric, residual_operator
from .probes import ProbeSource, column_dots, ordered_mean, run_probe_blocks

ALGORITHMS = ("plain", "kappa", "general")


class EstimationError(FloatingPointError):
    """A non-finite value appeared during estimation."""


class SchattenWarning(UserWarning):
    """Emitted for results or inputs outside the proven guarantees."""


@dataclass(frozen=True)
class EstimatorParams:
    t: int
    m: int
    alpha: float
    rigor: str
    seed: int


@dataclass(frozen=True)
class SchattenEstimate:
    """Result of one estimation.

    ``value_p_power`` is the raw randomized estimate of ``||A||_p**p`` and may
    be negative at tiny budgets; ``value_norm`` is computed from the copy
    clamped at zero.
    """

    value_p_power: float
    value_norm: float
    params: EstimatorParams
    diagnostics: dict = field(default_factory=dict)
    warning_flags: tuple = ()

    @property
    def value_p_power_clamped(self) -> float:
        return max(self.value_p_power, 0.0)


def effective_order(p: float, m: int) -> int:
    """Number of non-vanishing terms among the first ``m`` (``min(m, p)`` for integer ``p``)."""
    for k, a in enumerate(series.SeriesParams(p, m).coefficients(), start=1):
        if a == 0.0:
            return k - 1
    return m


def _htilde_probe_values(X, p, m, t, src, n_jobs):
    order = effective_order(p, m)
    coeffs = np.fromiter(series.SeriesParams(p, m).coefficients(), float, count=m)[:order]

    def block(start, stop):
        G = src.block(start, stop)
        V = G
        S = np.zeros(stop - start)
        sign = 1.0
        for k in range(order):
            V = X.matmat(V)
            u = column_dots(G, V)
            if not np.all(np.isfinite(u)):
                bad = start + int(np.flatnonzero(~np.isfinite(u))[0])
                raise EstimationError(f"non-finite value at probe {bad}, step {k + 1}")
            S += sign * coeffs[k] * u
            sign = -sign
        return S

    return run_probe_blocks(block, t, n_jobs), order


def hutchinson_htilde(X, p: float, m: int, t: int, src: ProbeSource, n_jobs=None) -> float:
    """Hutchinson estimate of ``tr h_tilde(X)`` with ``h_tilde`` truncated at order ``m``.

    Each probe ``g`` runs ``v_k = X v_{k-1}``, ``u_k = g . v_k`` and accumulates
    ``(-1)**(k-1) binom(p, k) u_k``, so one probe costs ``m'`` applications of
    ``X``.
    """
    X = aslinearoperator(X)
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if int(t) != t or t < 1:
        raise ValueError(f"t must be a positive integer, got {t!r}")
    if X.dim != src.n:
        raise ValueError(f"dimension mismatch: operator is {X.dim}, probes have length {src.n}")
    values, _ = _htilde_probe_values(X, float(p), int(m), int(t), src, n_jobs)
    return ordered_mean(values)


def power_iteration_budget(n: int, delta: float) -> tuple[int, int]:
    """``(trials, applications per trial)`` used by :func:`spectral_upper_bound`."""
    trials = int(math.ceil(math.log(1.0 / delta))) + 1
    steps = int(math.ceil(math.log(max(n, 2)))) + 3
    return trials, steps


def spectral_upper_bound(A, delta: float, src: ProbeSource) -> float:
    """Return ``alpha`` with ``lambda_1 <= alpha <= 6 lambda_1`` w.p. at least ``1 - delta``.

    Runs independent power iterations from Gaussian starts, takes the
    largest Rayleigh quotient (a lower bound on ``lambda_1`` that exceeds
    ``lambda_1 / 6`` with high probability) and multiplies it by 6.
    Returns 0 for the zero matrix.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    op = aslinearoperator(A)
    if op.dim != src.n:
        raise ValueError(f"dimension mismatch: operator is {op.dim}, probes have length {src.n}")
    trials, steps = power_iteration_budget(op.dim, delta)
    X = np.column_stack([src.normal(j) for j in range(trials)])
    X /= np.linalg.norm(X, axis=0)
    for _ in range(steps - 1):
        Y = op.matmat(X)
        norms = np.linalg.norm(Y, axis=0)
        if not np.all(np.isfinite(norms)):
            raise EstimationError("non-finite value during power iteration")
        # a trial that hits zero stays at zero: its Rayleigh quotient is 0
        X = np.divide(Y, norms, out=np.zeros_like(Y), where=norms > 0)
    Y = op.matmat(X)
    quotients = column_dots(X, Y)
    top = float(np.max(quotients))
    return 6.0 * top if top > 0 else 0.0


def _check_unit(name, value):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def _check_spsd_input(A, check_symmetric=True):
    M = as_csr(A)
    if check_symmetric and not is_symmetric(M):
        raise ValueError("input matrix is not symmetric")
    return M


def _run(op, n, nnz, *, series_p, norm_p, eps, delta, seed, rigor, alpha, kappa, n_jobs, algorithm):
    eps = _check_unit("eps", eps)
    delta = _check_unit("delta", delta)
    series._check_rigor(rigor)
    flags = []
    if series_p < 1:
        flags.append("p_outside_proven_range")
        warnings.warn(
            f"series exponent {series_p:g} < 1 lies outside the proven range of the estimator",
            SchattenWarning, stacklevel=3,
        )
    src = ProbeSource(seed, n)
    clock = time.perf_counter
    t0 = clock()

    if alpha is None:
        trials, steps = power_iteration_budget(n, delta / 2)
        alpha = spectral_upper_bound(op, delta / 2, src)
        power_matvecs = trials * steps
        hutch_delta = delta / 2
    else:
        alpha = float(alpha)
        if not (alpha > 0 and math.isfinite(alpha)):
            raise ValueError(f"user-supplied alpha must be a finite positive number, got {alpha!r}")
        power_matvecs = 0
        hutch_delta = delta
        flags.append("user_alpha")
    t1 = clock()

    if kappa is None:
        choice = series.choose_params_plain(series_p, n, eps, delta, rigor, hutchinson_delta=hutch_delta)
    else:
        choice = series.choose_params_kappa(series_p, kappa, eps, delta, rigor, hutchinson_delta=hutch_delta)
    params = EstimatorParams(t=choice.t, m=choice.m, alpha=alpha, rigor=rigor, seed=int(seed))
    diagnostics = {
        "algorithm": algorithm,
        "n": int(n),
        "nnz": int(nnz),
        "p": float(norm_p),
        "series_p": float(series_p),
        "effective_order": 0,
        "power_iteration_matvecs": power_matvecs,
        "hutchinson_matvecs": 0,
        "matvec_count": power_matvecs,
    }

    if alpha == 0.0:
        if kappa is not None:
            raise ValueError("zero matrix is singular; the condition-number estimator needs a nonsingular input")
        diagnostics["elapsed_ms"] = _elapsed(t0, t1, clock())
        return SchattenEstimate(0.0, 0.0, params, diagnostics, tuple(flags))

    X = residual_operator(op, alpha)
    values, order = _htilde_probe_values(X, series_p, choice.m, choice.t, src, n_jobs)
    trace_htilde = ordered_mean(values)
    t2 = clock()

    if kappa is None:
        beta = series.beta_m(series_p, choice.m)
        y = alpha**series_p * ((1.0 + beta) * n - trace_htilde)
        diagnostics["beta_m"] = beta
    else:
        y = alpha**series_p * (n - trace_htilde)
    if not math.isfinite(y):
        raise EstimationError("estimate is not finite")

    hutch_matvecs = choice.t * order
    diagnostics.update(
        effective_order=order,
        hutchinson_matvecs=hutch_matvecs,
        matvec_count=power_matvecs + hutch_matvecs,
        elapsed_ms=_elapsed(t0, t1, t2),
    )
    if y < 0:
        flags.append("negative_estimate")
        warnings.warn("randomized estimate is negative; reporting the raw value", SchattenWarning, stacklevel=3)
    norm = max(y, 0.0) ** (1.0 / norm_p)
    return SchattenEstimate(float(y), float(norm), params, diagnostics, tuple(flags))


def _elapsed(t0, t1, t2):
    return {
        "alpha_phase": (t1 - t0) * 1e3,
        "hutchinson_phase": (t2 - t1) * 1e3,
        "total": (t2 - t0) * 1e3,
    }


def schatten_plain(A, p, eps=0.1, delta=0.1, seed=0, rigor=series.PRACTICAL, *,
                   alpha=None, n_jobs=None, check_symmetric=True) -> SchattenEstimate:
    """Estimate ``||A||_p**p`` for SPSD ``A`` without any conditioning assumption.

    Parameters
    ----------
    A : sparse matrix or array-like
        Symmetric positive semidefinite ``n x n`` matrix.
    p : float
        Schatten exponent. The guarantee is proven for ``p >= 1``; smaller
        positive values run with a :class:`SchattenWarning`.
    eps, delta : float
        Relative accuracy and failure probability, both in ``(0, 1)``.
    seed : int
        Master seed of the probe source.
    rigor : {"practical", "rigorous"}
        ``"rigorous"`` inflates ``t`` by ``(1 + 6**p)**2``.
    alpha : float, optional
        Known bound ``lambda_1 <= alpha <= 6 lambda_1``; skips the power
        iteration and gives the whole ``delta`` to the trace stage.
    n_jobs : int, optional
        Threads for the probe loop. Results do not depend on it.

    Returns
    -------
    SchattenEstimate
    """
    M = _check_spsd_input(A, check_symmetric)
    return _run(M, M.shape[0], M.nnz, series_p=float(p), norm_p=float(p), eps=eps, delta=delta,
                seed=seed, rigor=rigor, alpha=alpha, kappa=None, n_jobs=n_jobs, algorithm="plain")


def schatten_kappa(A, p, kappa, eps=0.1, delta=0.1, seed=0, rigor=series.PRACTICAL, *,
                   alpha=None, n_jobs=None, check_symmetric=True) -> SchattenEstimate:
    """Estimate ``||A||_p**p`` for nonsingular SPSD ``A`` with ``lambda_1 / lambda_n <= kappa``.

    The condition-number bound is trusted, not verified. Other parameters as
    in :func:`schatten_plain`; rigorous mode multiplies ``t`` by 9.
    """
    kappa = float(kappa)
    if not (kappa >= 1 and math.isfinite(kappa)):
        raise ValueError(f"kappa must be a finite number >= 1, got {kappa!r}")
    M = _check_spsd_input(A, check_symmetric)
    if not np.any(M.data):
        raise ValueError("zero matrix is singular; the condition-number estimator needs a nonsingular input")
    return _run(M, M.shape[0], M.nnz, series_p=float(p), norm_p=float(p), eps=eps, delta=delta,
                seed=seed, rigor=rigor, alpha=alpha, kappa=kappa, n_jobs=n_jobs, algorithm="kappa")


def schatten_general(B, p, eps=0.1, delta=0.1, seed=0, rigor=series.PRACTICAL, *,
                     alpha=None, n_jobs=None) -> SchattenEstimate:
    """Estimate ``||B||_p**p = tr (B^T B)**(p/2)`` for a square, not necessarily symmetric ``B``.

    Runs the condition-number-free estimator on the implicit Gram operator
    with exponent ``p / 2``. ``alpha``, if given, bounds the top eigenvalue
    of ``B^T B`` (the squared top singular value).
    """
    M = as_csr(B)
    p = float(p)
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p!r}")
    op = gram_operator(M)
    return _run(op, M.shape[0], M.nnz, series_p=p / 2.0, norm_p=p, eps=eps, delta=delta,
                seed=seed, rigor=rigor, alpha=alpha, kappa=None, n_jobs=n_jobs, algorithm="general")
