"""Integer partitions and the partition-indexed scalars used by every series.

Hook lengths use the Jack parameter ``alpha = 2 / beta``.  This is the
convention under which the closed form for ``C_kappa(I_m)`` agrees with the
zonal-polynomial formula at ``beta = 1`` *and* under which the C-normalised
Jack polynomials satisfy ``sum_{|kappa| = k} C_kappa(X) = tr(X)^k`` for
``beta = 2, 4`` (both checked in the test suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

__all__ = [
    "Partition",
    "HookProducts",
    "enumerate_partitions",
    "iter_partitions",
    "conjugate",
    "hook_product",
    "pochhammer_beta",
    "log_pochhammer_beta",
    "jack_alpha",
]

VALID_BETAS = (1, 2, 4)


def check_beta(beta) -> int:
    if beta not in VALID_BETAS:
        raise ValueError(f"beta must be one of {VALID_BETAS}, got {beta!r}")
    return int(beta)


def jack_alpha(beta) -> float:
    """Jack parameter alpha = 2/beta."""
    return 2.0 / check_beta(beta)


class Partition(tuple):
    """Weakly decreasing tuple of positive integers.

    Trailing zeros are stripped, so ``Partition((2, 1, 0)) == (2, 1)``.
    """

    __slots__ = ()

    def __new__(cls, parts: Sequence[int] = ()):
        parts = [int(p) for p in parts]
        while parts and parts[-1] == 0:
            parts.pop()
        for i, p in enumerate(parts):
            if p < 1:
                raise ValueError(f"partition parts must be positive: {parts}")
            if i and p > parts[i - 1]:
                raise ValueError(f"partition must be weakly decreasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def __repr__(self):
        return f"Partition({tuple(self)})"


def iter_partitions(k: int, max_len: int, max_part: int | None = None) -> Iterator[tuple]:
    """Yield partitions of ``k`` with at most ``max_len`` parts as plain
    tuples, in reverse-lexicographic order."""
    if k < 0 or max_len < 0:
        raise ValueError("k and max_len must be nonnegative")
    if max_part is None:
        max_part = k
    if k == 0:
        yield ()
        return
    if max_len == 0:
        return
    for first in range(min(k, max_part), 0, -1):
        # the remaining max_len - 1 parts can absorb at most first * (max_len - 1)
        if first * max_len < k:
            break
        for rest in iter_partitions(k - first, max_len - 1, first):
            yield (first,) + rest


def enumerate_partitions(k: int, max_len: int) -> list[Partition]:
    """All partitions of ``k`` with length at most ``max_len``.

    The order is reverse-lexicographic and fixed, which keeps every series
    sum in this package bit-reproducible.

    >>> enumerate_partitions(3, 2)
    [Partition((3,)), Partition((2, 1))]
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if max_len < 1:
        raise ValueError("max_len must be positive")
    return [Partition(p) for p in iter_partitions(k, max_len)]


def conjugate(kappa: Sequence[int]) -> Partition:
    """Transpose of the Young diagram."""
    kappa = Partition(kappa)
    if not kappa:
        return kappa
    return Partition(sum(1 for p in kappa if p > j) for j in range(kappa[0]))


@dataclass(frozen=True)
class HookProducts:
    """Product of upper and lower hook lengths over all cells of a partition.

    ``log_j`` is always populated; ``j_kappa`` overflows to ``inf`` for very
    large partitions, so series code should use ``log_j``.
    """

    j_kappa: float
    log_j: float
    beta: int


def _hooks(kappa: Sequence[int], alpha: float):
    conj = conjugate(kappa)
    for i, row in enumerate(kappa, start=1):
        for j in range(1, row + 1):
            leg = conj[j - 1] - i
            arm = row - j
            upper = leg + alpha * (arm + 1)
            lower = leg + 1 + alpha * arm
            yield upper, lower


def hook_product(kappa: Sequence[int], beta: int) -> HookProducts:
    """``j_kappa = prod_cells h^*(i,j) h_*(i,j)`` with

    upper hook ``h^*(i,j) = kappa'_j - i + alpha (kappa_i - j + 1)`` and
    lower hook ``h_*(i,j) = kappa'_j - i + 1 + alpha (kappa_i - j)``.

    >>> hook_product((2,), 1).j_kappa
    24.0
    """
    alpha = jack_alpha(beta)
    j = 1.0
    log_j = 0.0
    for upper, lower in _hooks(Partition(kappa), alpha):
        j *= upper * lower  # float overflow saturates to inf
        log_j += math.log(upper) + math.log(lower)
    return HookProducts(j_kappa=j, log_j=log_j, beta=int(beta))


def pochhammer_beta(a: float, kappa: Sequence[int], beta: int) -> float:
    """Generalised Pochhammer symbol ``prod_i (a - (i-1) beta/2)_{kappa_i}``.

    Evaluated as a finite product so nonpositive starting points give exact
    zeros instead of gamma-function poles.
    """
    check_beta(beta)
    result = 1.0
    for i, row in enumerate(kappa):
        start = a - i * beta / 2.0
        for t in range(row):
            result *= start + t
    return result


def log_pochhammer_beta(a: float, kappa: Sequence[int], beta: int) -> tuple[float, int]:
    """``(log|(a)^beta_kappa|, sign)``; sign is 0 when the symbol vanishes."""
    check_beta(beta)
    log_abs = 0.0
    sign = 1
    for i, row in enumerate(kappa):
        start = a - i * beta / 2.0
        for t in range(row):
            f = start + t
            if f == 0.0:
                return -math.inf, 0
            if f < 0:
                sign = -sign
            log_abs += math.log(abs(f))
    return log_abs, sign
