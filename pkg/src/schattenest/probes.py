"""Reproducible Rademacher probes and the plain Hutchinson trace estimator.

Probe ``i`` of a :class:`ProbeSource` is a pure function of
``(master_seed, i, n)``: a SplitMix64 finalizer mixes the seed with the
probe index into a key, the key is expanded into ``ceil(n / 64)`` hashed
words, and each bit becomes one ``+1``/``-1`` entry. Probes can therefore be
generated in any order, in parallel, and still reproduce bit for bit.

Probe loops are evaluated in fixed-size blocks of :data:`BLOCK_SIZE`
columns. Threads only decide *who* evaluates a block, never how probes are
grouped, so results are identical for any thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linop import aslinearoperator

BLOCK_SIZE = 128

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_NORMAL_STREAM = 0x6E6F726D616C  # keeps Gaussian draws apart from sign probes


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 output finalizer on a ``uint64`` array."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _u64(values) -> np.ndarray:
    return np.asarray(values, dtype=np.uint64)


@dataclass(frozen=True)
class ProbeSource:
    """Seeded, order-independent source of Rademacher vectors of length ``n``."""

    master_seed: int
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"probe dimension must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)

    def _keys(self, indices: np.ndarray) -> np.ndarray:
        base = _mix64(_u64([(self.master_seed + _GAMMA) & _MASK64]))
        return _mix64(base ^ _mix64((indices + np.uint64(1)) * np.uint64(_GAMMA)))

    def block(self, start: int, stop: int) -> np.ndarray:
        """Probes ``start .. stop-1`` as the columns of an ``(n, stop-start)`` array."""
        if start < 0 or stop < start:
            raise ValueError(f"invalid probe range [{start}, {stop})")
        idx = np.arange(start, stop, dtype=np.uint64)
        n_words = -(-self.n // 64)
        counters = (np.arange(n_words, dtype=np.uint64) + np.uint64(1)) * np.uint64(_GAMMA)
        words = _mix64(self._keys(idx)[:, None] + counters[None, :])
        raw = words.astype("<u8", copy=False).view(np.uint8).reshape(idx.size, n_words * 8)
        bits = np.unpackbits(raw, axis=1, bitorder="little")[:, : self.n]
        return np.ascontiguousarray(bits.T, dtype=np.float64) * 2.0 - 1.0

    def normal(self, index: int) -> np.ndarray:
        """Standard-normal vector attached to ``index`` (used for power-iteration starts)."""
        rng = np.random.default_rng([self.master_seed, _NORMAL_STREAM, int(index)])
        return rng.standard_normal(self.n)


def rademacher_probe(src: ProbeSource, index: int) -> np.ndarray:
    """Probe vector ``g_index`` with entries in ``{-1, +1}``."""
    if index < 0:
        raise ValueError(f"probe index must be non-negative, got {index!r}")
    return src.block(index, index + 1)[:, 0]


def resolve_n_jobs(n_jobs) -> int:
    """``None`` -> 1, negative -> all cores (``-1``) in sklearn fashion."""
    if n_jobs is None:
        return 1
    n_jobs = int(n_jobs)
    if n_jobs == 0:
        raise ValueError("n_jobs must be non-zero")
    if n_jobs < 0:
        return max(1, (os.cpu_count() or 1) + 1 + n_jobs)
    return n_jobs


def run_probe_blocks(fn, t: int, n_jobs=None) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over fixed probe blocks; returns per-probe values.

    ``fn`` must return one value per probe in ``[start, stop)``. Values are
    written into their slot in probe-index order whatever the scheduling.
    """
    starts = list(range(0, t, BLOCK_SIZE))
    bounds = [(s, min(s + BLOCK_SIZE, t)) for s in starts]
    workers = min(resolve_n_jobs(n_jobs), len(bounds))
    if workers <= 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), bounds))
    slots = np.empty(t, dtype=np.float64)
    for (a, b), vals in zip(bounds, parts):
        slots[a:b] = vals
    return slots


def ordered_mean(values: np.ndarray) -> float:
    """Mean with left-to-right accumulation in probe-index order."""
    total = 0.0
    for v in values.tolist():
        total += v
    return total / len(values)


def column_dots(G: np.ndarray, V: np.ndarray) -> np.ndarray:
    """``G[:, j] . V[:, j]`` for every column ``j``."""
    return np.einsum("ij,ij->j", G, V)


def hutchinson_plain(op, t: int, src: ProbeSource, n_jobs=None) -> float:
    """Hutchinson estimate ``(1/t) sum_i g_i^T (op g_i)`` with Rademacher probes.

    Parameters
    ----------
    op : matrix or LinearOperator
        Square operator of dimension ``src.n``.
    t : int
        Number of probes, ``t >= 1``.
    src : ProbeSource
        Probe generator; probe indices ``0 .. t-1`` are used.
    n_jobs : int, optional
        Worker threads for the probe blocks. Does not affect the result.

    Returns
    -------
    float
        The trace estimate.
    """
    op = aslinearoperator(op)
    if int(t) != t or t < 1:
        raise ValueError(f"t must be a positive integer, got {t!r}")
    if op.dim != src.n:
        raise ValueError(f"dimension mismatch: operator is {op.dim}, probes have length {src.n}")

    def block(start, stop):
        G = src.block(start, stop)
        return column_dots(G, op.matmat(G))

    return ordered_mean(run_probe_blocks(block, int(t), n_jobs))
