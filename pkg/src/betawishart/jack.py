"""Jack polynomials ``C^beta_kappa`` in the C-normalisation.

The normalisation is the one for which ``sum_{|kappa|=k} C_kappa(X) = tr(X)^k``.
Values are produced for every partition of a truncation table at once, by
adding one eigenvalue at a time (see :mod:`betawishart._kernels`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels
from .partitions import Partition, check_beta, hook_product, iter_partitions, jack_alpha

__all__ = [
    "PartitionTable",
    "JackValues",
    "as_spectrum",
    "partition_table",
    "jack_values",
    "jack_c",
    "jack_identity_value",
    "log_jack_identity_value",
    "log_pochhammer_table",
    "log_identity_table",
]

_MAX_CODE = 2**62


def as_spectrum(x) -> np.ndarray:
    """Validate an eigenvalue list (any signs allowed) as a 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D eigenvalue list, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("eigenvalues must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class PartitionTable:
    """All partitions with weight <= ``max_degree`` and length <= ``max_len``.

    Rows are ordered by weight, then reverse-lexicographically.  ``P`` holds
    the parts zero-padded to ``max_len + 1`` columns (the last is a sentinel).
    """

    max_degree: int
    max_len: int
    parts: tuple
    P: np.ndarray
    weights: np.ndarray
    lengths: np.ndarray
    codes: np.ndarray
    mult: np.ndarray
    hkeys: np.ndarray
    hvals: np.ndarray
    shift: int
    mask: int
    offsets: np.ndarray  # rows of weight k are offsets[k]:offsets[k+1]

    def __len__(self):
        return len(self.parts)

    def index(self, kappa) -> int:
        kappa = Partition(kappa)
        if kappa.weight > self.max_degree or kappa.length > self.max_len:
            raise KeyError(kappa)
        code = sum(p * int(self.mult[r]) for r, p in enumerate(kappa))
        idx = _kernels.lookup(code, self.hkeys, self.hvals, self.shift, self.mask)
        if idx < 0:
            raise KeyError(kappa)
        return int(idx)


@lru_cache(maxsize=16)
def partition_table(max_degree: int, max_len: int) -> PartitionTable:
    if max_degree < 0 or max_len < 0:
        raise ValueError("max_degree and max_len must be nonnegative")
    L = max(min(max_len, max_degree), 1)
    # mixed radix: part r (0-based) never exceeds max_degree // (r + 1)
    mult = np.ones(L, dtype=np.int64)
    span = 1
    for r in range(L):
        mult[r] = span
        span *= max_degree // (r + 1) + 1
        if span >= _MAX_CODE:
            raise ValueError(
                f"partition table for degree {max_degree} and length {max_len} is too large"
            )
    parts = []
    offsets = [0]
    for k in range(max_degree + 1):
        parts.extend(iter_partitions(k, L))
        offsets.append(len(parts))
    N = len(parts)
    P = np.zeros((N, L + 1), dtype=np.int64)
    for a, p in enumerate(parts):
        P[a, : len(p)] = p
    weights = P.sum(axis=1)
    lengths = (P > 0).sum(axis=1)
    codes = P[:, :L] @ mult
    bits = max(int(math.ceil(math.log2(2 * N + 1))), 2)
    hkeys, hvals = _kernels.build_hash(codes, bits)
    return PartitionTable(
        max_degree=max_degree,
        max_len=L,
        parts=tuple(Partition(p) for p in parts),
        P=P,
        weights=weights,
        lengths=lengths,
        codes=codes,
        mult=mult,
        hkeys=hkeys,
        hvals=hvals,
        shift=64 - bits,
        mask=(1 << bits) - 1,
        offsets=np.asarray(offsets, dtype=np.int64),
    )


@dataclass(frozen=True, eq=False)
class JackValues:
    """``C_kappa(x) = scale**|kappa| * normed[idx(kappa)]`` for a whole table.

    ``scale`` is ``sum |x_i|``, so every entry of ``normed`` lies in [-1, 1].
    """

    table: PartitionTable
    normed: np.ndarray
    scale: float

    def __getitem__(self, kappa) -> float:
        kappa = Partition(kappa)
        return self.scale ** kappa.weight * self.normed[self.table.index(kappa)]


def _normed_values(y: np.ndarray, table: PartitionTable, alpha: float) -> np.ndarray:
    vals = np.zeros(len(table))
    vals[0] = 1.0
    out = np.empty_like(vals)
    for level, yi in enumerate(y, start=1):
        _kernels.add_variable(
            table.P, table.lengths, table.weights, table.codes, table.mult,
            table.hkeys, table.hvals, table.shift, table.mask,
            vals, float(yi), level, alpha, out,
        )
        vals, out = out, vals
    return vals


def jack_values(x, max_degree: int, beta: int, max_len: int | None = None) -> JackValues:
    """Evaluate every ``C^beta_kappa(x)`` with ``|kappa| <= max_degree`` and
    ``length(kappa) <= max_len`` (default: the number of eigenvalues).

    Zero eigenvalues are dropped before evaluation; a polynomial whose
    partition is longer than the number of nonzero eigenvalues is 0.
    """
    x = as_spectrum(x)
    alpha = jack_alpha(beta)
    if max_len is None:
        max_len = x.size
    table = partition_table(int(max_degree), int(max_len))
    y = x[x != 0.0]
    scale = float(np.abs(y).sum())
    if scale == 0.0:
        normed = np.zeros(len(table))
        normed[0] = 1.0
        return JackValues(table, normed, 0.0)
    return JackValues(table, _normed_values(y / scale, table, alpha), scale)


def jack_c(kappa: Sequence[int], x, beta: int) -> float:
    """``C^beta_kappa`` at the eigenvalues ``x``.

    >>> jack_c((1,), [2.0, 3.0], 1)
    5.0
    """
    kappa = Partition(kappa)
    x = as_spectrum(x)
    if kappa.length > np.count_nonzero(x):
        check_beta(beta)
        return 0.0
    vals = jack_values(x, kappa.weight, beta, max_len=max(kappa.length, 1))
    return float(vals[kappa])


def log_jack_identity_value(kappa: Sequence[int], m: int, beta: int) -> float:
    """``log C^beta_kappa(I_m)``; ``-inf`` when ``length(kappa) > m``."""
    kappa = Partition(kappa)
    alpha = jack_alpha(beta)
    if kappa.length > m:
        return -math.inf
    k = kappa.weight
    log_poch = 0.0
    for i, row in enumerate(kappa):
        start = m / alpha - i / alpha
        log_poch += math.lgamma(start + row) - math.lgamma(start)
    return 2 * k * math.log(alpha) + math.lgamma(k + 1) - hook_product(kappa, beta).log_j + log_poch


def jack_identity_value(kappa: Sequence[int], m: int, beta: int) -> float:
    """Closed form ``C^beta_kappa(I_m) = alpha^{2k} k! / j_kappa * (m beta/2)^beta_kappa``
    with ``alpha = 2/beta``.

    >>> round(jack_identity_value((2,), 3, 1), 12)
    5.0
    """
    if m < 1:
        raise ValueError("m must be positive")
    value = log_jack_identity_value(kappa, m, beta)
    return 0.0 if value == -math.inf else math.exp(value)


def log_pochhammer_table(a: float, table: PartitionTable, beta: int):
    """``(log|(a)^beta_kappa|, sign)`` for every row of ``table``.

    Vectorised counterpart of :func:`betawishart.partitions.log_pochhammer_beta`;
    rows whose symbol vanishes get ``(-inf, 0)``.
    """
    check_beta(beta)
    L = table.max_len
    K = max(table.max_degree, 1)
    log_abs = np.zeros(len(table))
    sign = np.ones(len(table), dtype=np.int64)
    t = np.arange(K, dtype=float)
    for r in range(L):
        f = a - r * beta / 2.0 + t
        cum_log = np.concatenate(([0.0], np.cumsum(np.log(np.abs(np.where(f == 0.0, 1.0, f))))))
        cum_neg = np.concatenate(([0], np.cumsum(f < 0)))
        cum_zero = np.concatenate(([0], np.cumsum(f == 0.0)))
        parts = table.P[:, r]
        log_abs += cum_log[parts]
        sign *= np.where(cum_neg[parts] % 2 == 1, -1, 1)
        sign *= np.where(cum_zero[parts] > 0, 0, 1)
    log_abs[sign == 0] = -np.inf
    return log_abs, sign


def log_identity_table(table: PartitionTable, m: int, beta: int) -> np.ndarray:
    """``log C_kappa(I_m)`` for every row of ``table`` (``-inf`` past length m)."""
    alpha = jack_alpha(beta)
    k = table.weights.astype(float)
    log_j = _kernels.log_hook_products(table.P, table.lengths, alpha)
    log_poch, sign = log_pochhammer_table(m * beta / 2.0, table, beta)
    lgk = np.array([math.lgamma(v + 1.0) for v in range(table.max_degree + 1)])
    out = 2.0 * k * math.log(alpha) + lgk[table.weights] - log_j + log_poch
    out[sign == 0] = -np.inf
    return out
