"""Scalar mathematics of the truncated binomial series.

For a real exponent ``p > 0`` and ``|x| <= 1``::

    1 - (1 - x)**p = h(x) = sum_{k>=1} (-1)**(k-1) * binom(p, k) * x**k

``h_tilde(x)`` keeps the first ``m`` terms and ``h_m(x)`` is the remainder.
This module holds the coefficients, the constant ``c(p)`` bounding them,
truncation-error bounds, and the rules that pick the probe count ``t`` and
the truncation order ``m`` for the two Schatten estimators.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

PRACTICAL = "practical"
RIGOROUS = "rigorous"
RIGOR_MODES = (PRACTICAL, RIGOROUS)


def _floor_p(p: float) -> int:
    return int(math.floor(p))


def _smallest_int_above(bound: float) -> int:
    """Smallest integer strictly greater than ``bound``."""
    return int(math.floor(bound)) + 1


def _check_p(p: float) -> float:
    p = float(p)
    if not (p > 0 and math.isfinite(p)):
        raise ValueError(f"exponent p must be a finite positive number, got {p!r}")
    return p


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in the open interval (0, 1), got {value!r}")
    return value


def _check_rigor(rigor: str) -> str:
    if rigor not in RIGOR_MODES:
        raise ValueError(f"rigor must be one of {RIGOR_MODES}, got {rigor!r}")
    return rigor


def min_truncation_order(p: float) -> int:
    """Smallest ``m`` with ``m > floor(p) + 1``; the tail bounds need it."""
    return _floor_p(p) + 2


@dataclass(frozen=True)
class SeriesParams:
    """Exponent and truncation order of ``h_tilde``."""

    p: float
    m: int

    def __post_init__(self):
        _check_p(self.p)
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"truncation order m must be a positive integer, got {self.m!r}")

    def coefficients(self) -> Iterator[float]:
        """Yield ``binom(p, k)`` for ``k = 1..m`` by the multiplicative recurrence."""
        a = float(self.p)
        for k in range(1, self.m + 1):
            yield a
            a = a * (self.p - k) / (k + 1)


def binomial_coeff(p: float, k: int) -> float:
    """Generalized binomial coefficient ``binom(p, k)`` for ``k >= 1``.

    Examples
    --------
    >>> binomial_coeff(0.5, 2)
    -0.125
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    a = float(p)
    for j in range(1, k):
        a = a * (p - j) / (j + 1)
    return a


def binomial_coeffs(p: float, m: int) -> np.ndarray:
    """Array ``[binom(p, 1), ..., binom(p, m)]`` via the same recurrence."""
    if m < 1:
        return np.empty(0)
    k = np.arange(1, m, dtype=float)
    ratios = (p - k) / (k + 1)
    return np.concatenate(([float(p)], p * np.cumprod(ratios)))


def c1_of_p(p: float) -> float:
    """``prod_{i=1}^{floor(p)} |(p - i + 1) / i|`` for ``p > 1``, else 1."""
    p = _check_p(p)
    if p <= 1:
        return 1.0
    out = 1.0
    for i in range(1, _floor_p(p) + 1):
        out *= abs((p - i + 1) / i)
    return out


def c_of_p(p: float) -> float:
    """Constant with ``|binom(p, k)| <= c(p) (k+1)**-(p+1)`` for ``k > floor(p)+1``."""
    p = _check_p(p)
    return c1_of_p(p) * (2.0 + _floor_p(p)) ** (p + 1.0)


def gamma_of_p(p: float) -> float:
    """Running-time constant ``(c(p)/p)**(1/p) * (1 + 6**p)**2``."""
    p = _check_p(p)
    return (c_of_p(p) / p) ** (1.0 / p) * (1.0 + 6.0**p) ** 2


def _check_m(p: float, m: int) -> None:
    if m < min_truncation_order(p):
        raise ValueError(
            f"truncation order m={m} too small for p={p}; need m > floor(p) + 1 = {_floor_p(p) + 1}"
        )


def beta_m(p: float, m: int) -> float:
    """Diagonal shift ``(c(p)/p) (m+1)**-p`` that keeps the truncated matrix PSD."""
    p = _check_p(p)
    _check_m(p, m)
    return c_of_p(p) / p * (m + 1.0) ** (-p)


def tail_bound(p: float, m: int, x):
    """Upper bound ``(c(p)/p) |x|**(m+1) (m+1)**-p`` on the remainder ``|h_m(x)|``."""
    p = _check_p(p)
    _check_m(p, m)
    ax = np.abs(np.asarray(x, dtype=float))
    if np.any(ax > 1):
        raise ValueError("tail_bound requires |x| <= 1")
    out = c_of_p(p) / p * ax ** (m + 1) * (m + 1.0) ** (-p)
    return float(out) if out.ndim == 0 else out


def h_tilde_scalar(params: SeriesParams, x):
    """Reference evaluation of ``sum_{k=1}^m (-1)**(k-1) binom(p, k) x**k``.

    Terms are added in increasing ``k``. ``x`` may be a scalar or an array.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ValueError("h_tilde_scalar requires |x| <= 1")
    total = np.zeros_like(x)
    power = np.ones_like(x)
    sign = 1.0
    for a in params.coefficients():
        power = power * x
        total = total + sign * a * power
        sign = -sign
    return float(total) if total.ndim == 0 else total


def h_tilde_table(p: float, m: int, x) -> np.ndarray:
    """All partial sums at once: row ``j`` holds ``h_tilde`` with ``m = j + 1``.

    Shape is ``(m, len(x))``. Used for grid checks over many orders.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = binomial_coeffs(p, m)
    signs = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
    powers = np.cumprod(np.broadcast_to(x, (m, x.size)), axis=0)
    return np.cumsum((signs * a)[:, None] * powers, axis=0)


def min_m_positivity(p: float, a: float) -> int:
    """Smallest ``m`` guaranteeing ``1 - h_tilde(x) > 0`` for ``0 < x <= a``."""
    p = _check_p(p)
    a = _check_unit_interval("a", a)
    bound = (math.log(c_of_p(p) / p) - p * math.log1p(-a)) / (1.0 - a) - 1.0
    return max(_smallest_int_above(bound), min_truncation_order(p))


def min_m_tail(p: float, a: float, eps: float) -> int:
    """Smallest ``m`` guaranteeing ``|h_m(1 - x)| < eps * x**p`` for ``a <= x <= 1``."""
    p = _check_p(p)
    a = _check_unit_interval("a", a)
    eps = _check_unit_interval("eps", eps)
    bound = (p * math.log(1.0 / a) + math.log(1.0 / eps) + math.log(c_of_p(p) / p)) / a - 1.0
    return max(_smallest_int_above(bound), min_truncation_order(p))


@dataclass(frozen=True)
class ParamChoice:
    """Probe count ``t`` and truncation order ``m`` for one estimation."""

    t: int
    m: int
    rigor: str = PRACTICAL


def probe_count(eps: float, delta: float) -> int:
    """Smallest ``t`` with ``t > (8 / eps**2) ln(1 / delta)``."""
    eps = _check_unit_interval("eps", eps)
    delta = _check_unit_interval("delta", delta)
    return _smallest_int_above(8.0 / eps**2 * math.log(1.0 / delta))


def _inflate(t: int, factor: float) -> int:
    return int(math.ceil(t * factor))


def choose_params_plain(p, n, eps, delta, rigor=PRACTICAL, *, hutchinson_delta=None) -> ParamChoice:
    """Parameters of the condition-number-free estimator.

    ``t > (8/eps**2) ln(2/delta)`` and ``m > 7 ((3 c(p)/p) (n/eps))**(1/p)``.
    In rigorous mode ``t`` is further multiplied by ``(1 + 6**p)**2``.

    ``hutchinson_delta`` overrides the failure probability given to the trace
    stage (default ``delta / 2``); pass ``delta`` when no spectral-bound
    phase runs.
    """
    p = _check_p(p)
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    eps = _check_unit_interval("eps", eps)
    delta = _check_unit_interval("delta", delta)
    rigor = _check_rigor(rigor)
    t = probe_count(eps, delta / 2 if hutchinson_delta is None else hutchinson_delta)
    if rigor == RIGOROUS:
        t = _inflate(t, (1.0 + 6.0**p) ** 2)
    m = _smallest_int_above(7.0 * (3.0 * c_of_p(p) / p * (n / eps)) ** (1.0 / p))
    return ParamChoice(t=t, m=max(m, min_truncation_order(p)), rigor=rigor)


def choose_params_kappa(p, kappa, eps, delta, rigor=PRACTICAL, *, hutchinson_delta=None) -> ParamChoice:
    """Parameters of the condition-number-aware estimator.

    ``m > 6 kappa [p ln(6 kappa) + ln(3/eps) + ln(c(p)/p)]``, then raised if
    needed so both the positivity and the relative-tail requirements hold
    with ``a = 1/(6 kappa)``. Rigorous mode multiplies ``t`` by 9.
    """
    p = _check_p(p)
    kappa = float(kappa)
    if not (kappa >= 1 and math.isfinite(kappa)):
        raise ValueError(f"kappa must be a finite number >= 1, got {kappa!r}")
    eps = _check_unit_interval("eps", eps)
    delta = _check_unit_interval("delta", delta)
    rigor = _check_rigor(rigor)
    t = probe_count(eps, delta / 2 if hutchinson_delta is None else hutchinson_delta)
    if rigor == RIGOROUS:
        t = _inflate(t, 9.0)
    six_k = 6.0 * kappa
    m = _smallest_int_above(
        six_k * (p * math.log(six_k) + math.log(3.0 / eps) + math.log(c_of_p(p) / p))
    )
    a = 1.0 / six_k
    m = max(m, min_m_positivity(p, 1.0 - a), min_m_tail(p, a, eps))
    return ParamChoice(t=t, m=max(m, min_truncation_order(p)), rigor=rigor)
