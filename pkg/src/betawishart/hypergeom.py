"""Truncated hypergeometric functions of one and two matrix arguments.

Every series is organised by total degree.  For each degree ``k`` the terms
over partitions of ``k`` are summed in the fixed table order (log-magnitude
bookkeeping, then a compensated ``math.fsum``) into a *layer*.  Since
``C_kappa(tX) = t^k C_kappa(X)``, a function evaluated along a ray ``tX``
only needs the layers once:

    F(tX) = sum_k L_k t^k.

:class:`LayeredSeries` stores the layers as ``(log|L_k|, sign)`` pairs and
evaluates that polynomial for many ``t`` at once with a Neumaier-compensated
running sum and the early-stop rule of :class:`TruncationBudget`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .jack import (
    PartitionTable,
    as_spectrum,
    jack_values,
    log_identity_table,
    log_pochhammer_table,
)
from .partitions import check_beta

__all__ = [
    "HypergeomParams",
    "TruncationBudget",
    "SeriesValue",
    "LayeredSeries",
    "hyper_hetero",
    "hyper_one_matrix",
    "one_matrix_layers",
    "one_matrix_terms",
    "hetero_terms",
    "kummer_transform",
    "check_lower_parameters",
]


@dataclass(frozen=True)
class HypergeomParams:
    """Upper parameters ``a_1..a_p``, lower parameters ``b_1..b_q`` and beta."""

    upper: tuple = ()
    lower: tuple = ()
    beta: int = 1

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(float(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(float(b) for b in self.lower))
        object.__setattr__(self, "beta", check_beta(self.beta))


@dataclass(frozen=True)
class TruncationBudget:
    """Maximum total degree ``max_degree`` (K) and early-stop tolerance.

    Summation stops at degree ``k`` once the layers ``k - 1`` and ``k`` are
    both at most ``layer_tol`` times the running total.
    """

    max_degree: int = 60
    layer_tol: float = 1e-12

    def __post_init__(self):
        if int(self.max_degree) != self.max_degree or self.max_degree < 0:
            raise ValueError(f"max_degree must be a nonnegative integer, got {self.max_degree!r}")
        if not self.layer_tol >= 0:
            raise ValueError(f"layer_tol must be nonnegative, got {self.layer_tol!r}")
        object.__setattr__(self, "max_degree", int(self.max_degree))
        object.__setattr__(self, "layer_tol", float(self.layer_tol))


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series value with its convergence diagnostics.

    Attributes
    ----------
    value : float
        The truncated sum (``sign * exp(log_abs)``; may overflow to inf even
        when ``log_abs`` is finite).
    degrees_used : int
        Highest degree included in the sum.
    last_layer_ratio : float
        ``|layer at degrees_used| / |value|``.
    converged : bool
        ``last_layer_ratio <= layer_tol``.
    log_abs, sign :
        Log-magnitude form of ``value``.
    """

    value: float
    degrees_used: int
    last_layer_ratio: float
    converged: bool
    log_abs: float = field(default=-math.inf)
    sign: int = 0


def check_lower_parameters(lower: Sequence[float], beta: int, max_degree: int, max_len: int):
    """Raise ``ValueError`` if some ``(b)^beta_kappa`` with ``|kappa| <= K`` vanishes.

    Row ``i`` (1-based) of the Pochhammer symbol starts at ``z = b - (i-1) beta/2``;
    it vanishes once ``kappa_i >= 1 - z`` when ``z`` is a nonpositive integer,
    which first happens at weight ``i (1 - z)``.
    """
    for b in lower:
        for i in range(1, max_len + 1):
            z = b - (i - 1) * beta / 2.0
            if z <= 0 and z == math.floor(z) and i * (1 - z) <= max_degree:
                raise ValueError(
                    f"lower parameter {b} gives a vanishing Pochhammer symbol "
                    f"within degree {max_degree}"
                )


@dataclass(frozen=True, eq=False)
class LayeredSeries:
    """Per-degree layers ``L_0..L_K`` of a series in log-magnitude form."""

    log_abs: np.ndarray
    sign: np.ndarray

    @property
    def max_degree(self) -> int:
        return len(self.log_abs) - 1

    def evaluate_many(self, log_t, layer_tol: float = 1e-12, weights=None):
        """Evaluate ``sum_k L_k t^k`` (optionally ``sum_k w_k(t) L_k t^k``).

        Parameters
        ----------
        log_t : array_like
            ``log t`` for each evaluation point.
        layer_tol : float
            Early-stop tolerance.
        weights : ndarray, optional
            Shape ``(len(log_t), K + 1)`` signed multipliers per term.

        Returns
        -------
        log_abs, sign, degrees_used, last_ratio : ndarray
        """
        log_t = np.atleast_1d(np.asarray(log_t, dtype=float))
        K = self.max_degree
        k = np.arange(K + 1)
        with np.errstate(invalid="ignore"):
            T = self.log_abs[None, :] + k[None, :] * log_t[:, None]
        S = np.broadcast_to(self.sign[None, :], T.shape).astype(float)
        T = np.where(S == 0, -np.inf, T)
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            with np.errstate(divide="ignore"):
                T = T + np.log(np.abs(weights))
            S = S * np.sign(weights)
            T = np.where(S == 0, -np.inf, T)
        M = np.max(T, axis=1)
        M = np.where(np.isfinite(M), M, 0.0)
        npts = T.shape[0]
        total = np.zeros(npts)
        comp = np.zeros(npts)
        stopped = np.zeros(npts, dtype=bool)
        degrees = np.full(npts, K, dtype=np.int64)
        last_ratio = np.zeros(npts)
        below_prev = np.zeros(npts, dtype=bool)
        for j in range(K + 1):
            term = S[:, j] * np.exp(T[:, j] - M)
            active = ~stopped
            # Neumaier compensated summation
            new = total + term
            big = np.abs(total) >= np.abs(term)
            corr = np.where(big, (total - new) + term, (term - new) + total)
            total = np.where(active, new, total)
            comp = np.where(active, comp + corr, comp)
            running = np.abs(total + comp)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(term == 0.0, 0.0, np.abs(term) / running)
            ratio = np.where(np.isnan(ratio), np.inf, ratio)
            last_ratio = np.where(active, ratio, last_ratio)
            below = ratio <= layer_tol
            newly = active & below & below_prev & (j >= 1)
            degrees = np.where(newly, j, degrees)
            stopped |= newly
            below_prev = below
        value = total + comp
        sign = np.sign(value).astype(np.int64)
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(value)) + M
        return log_abs, sign, degrees, last_ratio

    def evaluate(self, t: float = 1.0, layer_tol: float = 1e-12) -> SeriesValue:
        if t < 0:
            raise ValueError("t must be nonnegative; fold signs into the argument")
        if t == 0:
            log_abs, sign = float(self.log_abs[0]), int(self.sign[0])
            return SeriesValue(sign * math.exp(log_abs) if sign else 0.0, 0, 0.0, True, log_abs, sign)
        la, sg, deg, ratio = self.evaluate_many([math.log(t)], layer_tol)
        return _series_value(float(la[0]), int(sg[0]), int(deg[0]), float(ratio[0]), layer_tol)


def _series_value(log_abs, sign, degrees, ratio, layer_tol) -> SeriesValue:
    if sign == 0:
        value = 0.0
    else:
        value = sign * math.exp(log_abs) if log_abs < 709.0 else sign * math.inf
    return SeriesValue(value, degrees, ratio, bool(ratio <= layer_tol), log_abs, sign)


def _signed_log(values: np.ndarray):
    sign = np.sign(values).astype(np.int64)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(values)), sign


def _layers(table: PartitionTable, log_terms: np.ndarray, signs: np.ndarray) -> LayeredSeries:
    K = table.max_degree
    layer_log = np.full(K + 1, -np.inf)
    layer_sign = np.zeros(K + 1, dtype=np.int64)
    for k in range(K + 1):
        lo, hi = table.offsets[k], table.offsets[k + 1]
        lt = log_terms[lo:hi]
        sg = signs[lo:hi]
        keep = sg != 0
        if not np.any(keep):
            continue
        M = float(np.max(lt[keep]))
        s = math.fsum((sg[keep] * np.exp(lt[keep] - M)).tolist())
        if s != 0.0:
            layer_log[k] = M + math.log(abs(s))
            layer_sign[k] = 1 if s > 0 else -1
    return LayeredSeries(layer_log, layer_sign)


def _pochhammer_ratio(params: HypergeomParams, table: PartitionTable):
    log_r = np.zeros(len(table))
    sign = np.ones(len(table), dtype=np.int64)
    for a in params.upper:
        la, sa = log_pochhammer_table(a, table, params.beta)
        log_r = log_r + np.where(sa == 0, 0.0, la)
        sign = sign * sa
    for b in params.lower:
        lb, sb = log_pochhammer_table(b, table, params.beta)
        log_r = log_r - lb
        sign = sign * sb
    return log_r, sign


def _log_factorials(table: PartitionTable) -> np.ndarray:
    lg = np.array([math.lgamma(k + 1.0) for k in range(table.max_degree + 1)])
    return lg[table.weights]


def _log_jack(x: np.ndarray, K: int, beta: int, max_len: int):
    vals = jack_values(x, K, beta, max_len=max_len)
    log_n, sign = _signed_log(vals.normed)
    if vals.scale > 0:
        log_n = log_n + vals.table.weights * math.log(vals.scale)
    return vals.table, log_n, sign


def _pad(x, m: int, name: str) -> np.ndarray:
    x = as_spectrum(x)
    if x.size > m:
        raise ValueError(f"{name} has {x.size} eigenvalues but dimension is {m}")
    return np.concatenate([x, np.zeros(m - x.size)])


def one_matrix_terms(params: HypergeomParams, m: int, X, max_degree: int):
    """Per-partition terms of ``pFq^{(beta; m)}(a; b; X)`` in log form.

    Returns ``(table, log_abs, sign)`` with one entry per row of ``table``.
    ``X`` may list fewer than ``m`` eigenvalues; the rest are zeros.
    """
    if m < 1:
        raise ValueError("m must be positive")
    X = _pad(X, m, "X")
    check_lower_parameters(params.lower, params.beta, max_degree, m)
    table, log_c, sign_c = _log_jack(X, max_degree, params.beta, m)
    log_r, sign_r = _pochhammer_ratio(params, table)
    return table, log_r + log_c - _log_factorials(table), sign_r * sign_c


def one_matrix_layers(params: HypergeomParams, m: int, X, max_degree: int) -> LayeredSeries:
    """Degree layers of ``pFq^{(beta; m)}(a; b; X)``."""
    return _layers(*one_matrix_terms(params, m, X, max_degree))


def hyper_one_matrix(params: HypergeomParams, m: int, X, budget: TruncationBudget = TruncationBudget()) -> SeriesValue:
    """Truncated ``pFq^{(beta; m)}(a_1..a_p; b_1..b_q; X)``.

    >>> round(hyper_one_matrix(HypergeomParams(), 1, [1.0]).value, 9)
    2.718281828
    """
    layers = one_matrix_layers(params, m, X, budget.max_degree)
    return layers.evaluate(1.0, budget.layer_tol)


def hetero_terms(params: HypergeomParams, m: int, n: int, A, B, max_degree: int):
    """Per-partition terms of ``pFq^{(beta; m, n)}(a; b; A, B)``: ``(table, log_abs, sign)``."""
    if m < n:
        raise ValueError(f"need m >= n, got m={m}, n={n}")
    if n < 1:
        raise ValueError("n must be positive")
    A = as_spectrum(A)
    B = as_spectrum(B)
    if A.size != m:
        raise ValueError(f"A must have {m} eigenvalues, got {A.size}")
    if B.size != n:
        raise ValueError(f"B must have {n} eigenvalues, got {B.size}")
    check_lower_parameters(params.lower, params.beta, max_degree, n)
    table, log_a, sign_a = _log_jack(A, max_degree, params.beta, n)
    _, log_b, sign_b = _log_jack(B, max_degree, params.beta, n)
    log_r, sign_r = _pochhammer_ratio(params, table)
    log_id = log_identity_table(table, m, params.beta)
    log_terms = log_r + log_a + log_b - _log_factorials(table) - log_id
    return table, log_terms, sign_r * sign_a * sign_b


def hyper_hetero(
    params: HypergeomParams,
    m: int,
    n: int,
    A,
    B,
    budget: TruncationBudget = TruncationBudget(),
) -> SeriesValue:
    """Truncated heterogeneous ``pFq^{(beta; m, n)}(a; b; A, B)``.

    The sum runs over partitions of length at most ``n`` with terms

        prod (a_i)_kappa / prod (b_j)_kappa * C_kappa(A) C_kappa(B) / (k! C_kappa(I_m)).

    Parameters
    ----------
    A : eigenvalues of the m x m argument
    B : eigenvalues of the n x n argument
    """
    layers = _layers(*hetero_terms(params, m, n, A, B, budget.max_degree))
    return layers.evaluate(1.0, budget.layer_tol)


def kummer_transform(a: float, c: float, X, m: int, beta: int):
    """Kummer relation ``1F1(a; c; -X) = etr(-X) 1F1(c - a; c; X)``.

    ``X`` lists the eigenvalues of the *negated* argument, i.e. the input
    function is ``1F1^{(beta; m)}(a; c; -X)``.  Returns ``(c - a, c, X, etr(-X))``,
    so a nonnegative ``X`` leads to a series with positive terms.
    """
    check_beta(beta)
    X = _pad(X, m, "X")
    return c - a, c, X, math.exp(-math.fsum(X.tolist()))
