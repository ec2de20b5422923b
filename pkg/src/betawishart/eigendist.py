"""Largest-eigenvalue distribution and joint eigenvalue density of singular
beta-Wishart matrices ``W = X X^*`` with ``X ~ N^beta_{m,n}(0, Sigma (x) I_n)``, m > n.

The CDF of the largest eigenvalue is evaluated as a positive-term series.
For a general ``Sigma`` this is

    F(x) = G (x beta/2)^{beta n m/2} |Sigma|^{-n beta/2} etr(-(beta x/2) Sigma^{-1})
           1F1^{(beta; m)}((m-1)beta/2 + 1; (n+m-1)beta/2 + 1; (beta/2) x Sigma^{-1})

with ``G = Gamma^beta_n((n-1)beta/2 + 1) / Gamma^beta_n((n+m-1)beta/2 + 1)``.
When ``Sigma = lambda I_m`` the same function collapses to a series over
partitions of length at most ``n`` (dimension ``n`` instead of ``m``):

    F(x) = G (beta x / (2 lambda))^{beta n m/2} exp(-n beta x / (2 lambda))
           1F1^{(beta; n)}((n-1)beta/2 + 1; (n+m-1)beta/2 + 1; (beta x/(2 lambda)) I_n),

which needs far fewer terms for the same accuracy when ``m`` is large.

Both series are homogeneous in ``x`` degree by degree, so the per-degree
layers are computed once per (spec, budget) and reused for every ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .hypergeom import (
    HypergeomParams,
    LayeredSeries,
    SeriesValue,
    TruncationBudget,
    _layers,
    _series_value,
    hyper_hetero,
    one_matrix_layers,
)
from .jack import log_identity_table, log_pochhammer_table, partition_table
from .partitions import check_beta

__all__ = [
    "WishartSpec",
    "DistValue",
    "ConvergenceError",
    "LargestEigenvalueDistribution",
    "log_multigamma_beta",
    "cdf_largest",
    "pdf_largest",
    "quantile_largest",
    "sup_cdf",
    "joint_density",
    "pdf_m2_nonnull",
    "hyp1f1_half_one",
]


class ConvergenceError(RuntimeError):
    """A truncated series could not deliver the requested quantity."""


def _sigma_eigenvalues(sigma, m: int | None) -> np.ndarray:
    if sigma is None or (isinstance(sigma, str) and sigma == "identity"):
        if m is None:
            raise ValueError("an identity sigma needs an explicit m")
        return np.ones(m)
    arr = np.asarray(sigma, dtype=float)
    if arr.ndim == 0:
        if m is None:
            raise ValueError("a scalar sigma needs an explicit m")
        return np.full(m, float(arr))
    if arr.ndim == 2:
        if arr.shape[0] != arr.shape[1]:
            raise ValueError(f"sigma matrix must be square, got {arr.shape}")
        if not np.allclose(arr, arr.T, rtol=1e-10, atol=1e-12):
            raise ValueError("sigma matrix must be symmetric")
        return np.linalg.eigvalsh((arr + arr.T) / 2.0)
    if arr.ndim == 1:
        return arr
    raise ValueError(f"cannot interpret sigma of shape {arr.shape}")


@dataclass(frozen=True)
class WishartSpec:
    """A singular beta-Wishart ensemble.

    Parameters
    ----------
    beta : {1, 2, 4}
    m : int
        Dimension of ``W``.
    n : int
        Number of columns of ``X``; ``W`` has rank ``n < m``.
    sigma_eigs : sequence of float
        Eigenvalues of ``Sigma``; stored sorted in descending order.
    """

    beta: int
    m: int
    n: int
    sigma_eigs: tuple

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))
        m, n = int(self.m), int(self.n)
        if m != self.m or n != self.n or n < 1:
            raise ValueError("m and n must be positive integers")
        if m <= n:
            raise ValueError(f"the singular case needs m > n, got m={m}, n={n}")
        eigs = np.asarray(self.sigma_eigs, dtype=float).ravel()
        if eigs.size != m:
            raise ValueError(f"expected {m} eigenvalues of sigma, got {eigs.size}")
        if not np.all(np.isfinite(eigs)) or np.any(eigs <= 0):
            raise ValueError("sigma must be positive definite")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sigma_eigs", tuple(float(v) for v in np.sort(eigs)[::-1]))

    @classmethod
    def from_sigma(cls, beta: int, n: int, sigma=None, m: int | None = None) -> "WishartSpec":
        """Build a spec from ``"identity"``/None, a scalar, an eigenvalue list or a matrix."""
        eigs = _sigma_eigenvalues(sigma, m)
        if m is not None and eigs.size != m:
            raise ValueError(f"sigma has {eigs.size} eigenvalues but m={m}")
        return cls(beta, eigs.size, n, tuple(eigs))

    @property
    def eigs(self) -> np.ndarray:
        return np.asarray(self.sigma_eigs)

    @property
    def is_isotropic(self) -> bool:
        e = self.eigs
        return bool(e[0] - e[-1] <= 1e-12 * e[0])

    @property
    def log_det(self) -> float:
        return math.fsum(np.log(self.eigs).tolist())

    def scaled(self, c: float) -> "WishartSpec":
        return WishartSpec(self.beta, self.m, self.n, tuple(c * self.eigs))


@dataclass(frozen=True)
class DistValue:
    """A probability or density value with the series that produced it.

    ``value`` is the raw truncated value; :attr:`clipped` is what should be
    displayed as a probability.
    """

    value: float
    series: SeriesValue

    @property
    def probability(self) -> float:
        return self.value

    @property
    def clipped(self) -> float:
        return min(max(self.value, 0.0), 1.0)


def log_multigamma_beta(c: float, n: int, beta: int) -> float:
    """``log Gamma^beta_n(c) = log[pi^{n(n-1)beta/4} prod_i Gamma(c - (i-1)beta/2)]``.

    >>> round(log_multigamma_beta(3.0, 2, 2), 12) == round(math.log(2 * math.pi), 12)
    True
    """
    check_beta(beta)
    if n < 1:
        raise ValueError("n must be positive")
    if c <= (n - 1) * beta / 2.0:
        raise ValueError(f"multivariate gamma needs c > {(n - 1) * beta / 2.0}, got {c}")
    return n * (n - 1) * beta / 4.0 * math.log(math.pi) + math.fsum(
        math.lgamma(c - i * beta / 2.0) for i in range(n)
    )


def _isotropic_layers(spec: WishartSpec, K: int) -> LayeredSeries:
    beta, n, m = spec.beta, spec.n, spec.m
    a = (n - 1) * beta / 2.0 + 1.0
    c = (n + m - 1) * beta / 2.0 + 1.0
    table = partition_table(K, n)
    la, sa = log_pochhammer_table(a, table, beta)
    lc, sc = log_pochhammer_table(c, table, beta)
    lg = np.array([math.lgamma(k + 1.0) for k in range(K + 1)])
    rate = beta / (2.0 * spec.eigs[0])
    log_terms = la - lc + log_identity_table(table, n, beta) - lg[table.weights]
    log_terms = log_terms + table.weights * math.log(rate)
    return _layers(table, log_terms, sa * sc)


class LargestEigenvalueDistribution(TransformerMixin, BaseEstimator):
    """Truncated distribution of the largest eigenvalue of a singular beta-Wishart matrix.

    ``fit`` computes the per-degree series layers once; ``cdf``, ``pdf``,
    ``quantile`` and ``transform`` then evaluate them at any number of points.
    ``fit`` ignores its data argument: the distribution is fully specified by
    the constructor parameters.

    Parameters
    ----------
    beta : {1, 2, 4}
    m, n : int
        Dimension and rank, ``m > n``.
    sigma : None, "identity", float, sequence or 2-D array
        Population covariance (identity when None).
    max_degree : int
        Truncation degree K.
    layer_tol : float
        Early-stop tolerance for the per-degree layers.
    route : {"auto", "general", "isotropic"}
        Series used for the CDF.  "auto" picks "isotropic" when sigma is a
        multiple of the identity.

    Examples
    --------
    >>> dist = LargestEigenvalueDistribution(beta=1, m=10, n=3, max_degree=60).fit()
    >>> round(float(dist.cdf(16.2)[0]), 2)
    0.5
    """

    def __init__(self, beta=1, m=2, n=1, sigma=None, max_degree=60, layer_tol=1e-12, route="auto"):
        self.beta = beta
        self.m = m
        self.n = n
        self.sigma = sigma
        self.max_degree = max_degree
        self.layer_tol = layer_tol
        self.route = route

    @classmethod
    def from_spec(cls, spec: WishartSpec, budget: TruncationBudget = TruncationBudget(), route="auto"):
        return cls(
            beta=spec.beta, m=spec.m, n=spec.n, sigma=list(spec.sigma_eigs),
            max_degree=budget.max_degree, layer_tol=budget.layer_tol, route=route,
        )

    def fit(self, X=None, y=None):
        spec = WishartSpec.from_sigma(self.beta, self.n, self.sigma, self.m)
        budget = TruncationBudget(self.max_degree, self.layer_tol)
        route = self.route
        if route == "auto":
            route = "isotropic" if spec.is_isotropic else "general"
        if route not in ("general", "isotropic"):
            raise ValueError(f"unknown route {self.route!r}")
        if route == "isotropic" and not spec.is_isotropic:
            raise ValueError("the isotropic route needs sigma proportional to the identity")
        beta, m, n = spec.beta, spec.m, spec.n
        power = beta * n * m / 2.0
        log_gamma = log_multigamma_beta((n - 1) * beta / 2.0 + 1.0, n, beta) - log_multigamma_beta(
            (n + m - 1) * beta / 2.0 + 1.0, n, beta
        )
        if route == "isotropic":
            lam = spec.eigs[0]
            layers = _isotropic_layers(spec, budget.max_degree)
            log_const = log_gamma + power * math.log(beta / (2.0 * lam))
            rate = n * beta / (2.0 * lam)
        else:
            inv = beta / (2.0 * spec.eigs)
            params = HypergeomParams([(m - 1) * beta / 2.0 + 1.0], [(n + m - 1) * beta / 2.0 + 1.0], beta)
            layers = one_matrix_layers(params, m, inv, budget.max_degree)
            log_const = log_gamma + power * math.log(beta / 2.0) - n * beta / 2.0 * spec.log_det
            rate = math.fsum(inv.tolist())
        self.spec_ = spec
        self.budget_ = budget
        self.route_ = route
        self.layers_ = layers
        self.log_const_ = log_const
        self.power_ = power
        self.rate_ = rate
        return self

    # evaluation --------------------------------------------------------

    def _points(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        if np.any(~(x > 0)) or not np.all(np.isfinite(x)):
            raise ValueError("evaluation points must be positive and finite")
        return x

    def evaluate(self, x, kind: str = "cdf"):
        """Vectorised evaluation returning ``(value, degrees_used, last_ratio, converged)``."""
        check_is_fitted(self, "layers_")
        x = self._points(x)
        log_x = np.log(x)
        weights = None
        if kind == "pdf":
            k = np.arange(self.layers_.max_degree + 1)
            weights = (self.power_ + k[None, :]) / x[:, None] - self.rate_
        elif kind != "cdf":
            raise ValueError(f"kind must be 'cdf' or 'pdf', got {kind!r}")
        tol = self.budget_.layer_tol
        log_s, sign, degrees, ratio = self.layers_.evaluate_many(log_x, tol, weights)
        log_val = self.log_const_ + self.power_ * log_x - self.rate_ * x + log_s
        with np.errstate(over="ignore"):
            value = np.where(sign == 0, 0.0, sign * np.exp(log_val))
        return value, degrees, ratio, ratio <= tol

    def _dist_values(self, x, kind):
        value, degrees, ratio, conv = self.evaluate(x, kind)
        tol = self.budget_.layer_tol
        out = []
        for v, d, r in zip(value, degrees, ratio):
            series = _series_value(math.log(abs(v)) if v else -math.inf, int(np.sign(v)), int(d), float(r), tol)
            out.append(DistValue(float(v), series))
        return out

    def cdf(self, x) -> np.ndarray:
        return self.evaluate(x, "cdf")[0]

    def pdf(self, x) -> np.ndarray:
        return self.evaluate(x, "pdf")[0]

    def monotone_cdf(self, x) -> np.ndarray:
        """Nondecreasing envelope ``F_K(min(x, x_star))`` of the truncated CDF.

        Past the location ``x_star`` of its maximum the truncated series decays
        back to zero; the envelope holds the maximum instead, which makes it a
        proper (defective) distribution function for goodness-of-fit tests.
        """
        check_is_fitted(self, "layers_")
        if not hasattr(self, "sup_"):
            self.sup_ = self.sup()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape)
        pos = x > 0
        out[pos] = self.cdf(np.minimum(x[pos], self.sup_[0]))
        return out

    def transform(self, X):
        """CDF values of a column of points, shape ``(n_samples, 1)``."""
        X = np.asarray(X, dtype=float)
        return self.cdf(X.ravel()).reshape(-1, 1)

    def sup(self, grid_size: int = 400):
        """Maximum of the truncated CDF over ``x > 0``: returns ``(x_star, value)``.

        The truncated CDF tends to 0 at infinity, and every term peaks
        before ``(power + K) / rate``, so the search covers a few times that.
        """
        check_is_fitted(self, "layers_")
        hi = 4.0 * (self.power_ + self.layers_.max_degree) / self.rate_
        grid = np.linspace(hi / grid_size, hi, grid_size)
        vals = self.cdf(grid)
        i = int(np.argmax(vals))
        lo_b = grid[max(i - 1, 0)] if i > 0 else grid[0] / 2
        hi_b = grid[min(i + 1, grid_size - 1)]
        res = optimize.minimize_scalar(
            lambda t: -float(self.cdf(t)[0]), bounds=(lo_b, hi_b), method="bounded",
            options={"xatol": 1e-10 * hi},
        )
        if -res.fun >= vals[i]:
            return float(res.x), float(-res.fun)
        return float(grid[i]), float(vals[i])

    def quantile(self, alpha: float, tol: float = 1e-6) -> float:
        """Root of ``cdf(x) = alpha``.

        Starts from ``eps = 1e-8 tr(Sigma)``, doubles the upper end until the
        CDF reaches ``alpha`` or the truncated CDF is both flagged as not
        converged and falling (past its peak), then uses Brent.
        Raises :class:`ConvergenceError` when the truncated CDF never reaches
        ``alpha``; a larger ``max_degree`` is then needed.
        """
        check_is_fitted(self, "layers_")
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        eps = 1e-8 * float(np.sum(self.spec_.eigs))
        lo = eps
        hi = 2.0 * eps
        f = lambda t: float(self.cdf(t)[0]) - alpha
        if f(lo) >= 0:
            return lo
        prev = f(lo) + alpha
        while True:
            v, _, _, conv = self.evaluate(hi)
            if v[0] >= alpha:
                break
            if (not conv[0] and v[0] < prev) or hi > 1e300:
                # the truncated CDF may peak between lo and hi
                grid = np.geomspace(eps, hi, 4000)
                vals = self.cdf(grid)
                j = int(np.argmax(vals >= alpha)) if np.any(vals >= alpha) else -1
                if j < 0:
                    raise ConvergenceError(
                        f"truncated CDF stays below {alpha} (max {vals.max():.6g}); "
                        f"increase max_degree beyond {self.layers_.max_degree}"
                    )
                lo, hi = grid[max(j - 1, 0)], grid[j]
                break
            lo, prev = hi, v[0]
            hi *= 2.0
        x = optimize.brentq(f, lo, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps, maxiter=500)
        if abs(f(x)) > tol:
            raise ConvergenceError(f"quantile root-finding missed alpha={alpha} by {abs(f(x)):.3g}")
        return float(x)


@lru_cache(maxsize=32)
def _fitted(spec: WishartSpec, budget: TruncationBudget, route: str = "auto") -> LargestEigenvalueDistribution:
    return LargestEigenvalueDistribution.from_spec(spec, budget, route).fit()


def _scalar_x(x) -> float:
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"x must be positive and finite, got {x}")
    return x


def cdf_largest(x: float, spec: WishartSpec, budget: TruncationBudget = TruncationBudget(), route: str = "auto") -> DistValue:
    """Truncated ``Pr(l_1 < x)``; the raw value is kept (not clipped)."""
    return _fitted(spec, budget, route)._dist_values(_scalar_x(x), "cdf")[0]


def pdf_largest(x: float, spec: WishartSpec, budget: TruncationBudget = TruncationBudget(), route: str = "auto") -> DistValue:
    """Density of the largest eigenvalue: exact derivative of the truncated CDF."""
    return _fitted(spec, budget, route)._dist_values(_scalar_x(x), "pdf")[0]


def quantile_largest(alpha: float, spec: WishartSpec, budget: TruncationBudget = TruncationBudget(), route: str = "auto") -> float:
    return _fitted(spec, budget, route).quantile(alpha)


def sup_cdf(spec: WishartSpec, budget: TruncationBudget = TruncationBudget(), route: str = "auto"):
    """``(x_star, max_x F_K(x))`` for the truncated CDF."""
    return _fitted(spec, budget, route).sup()


def _joint_log_constant(spec: WishartSpec) -> float:
    beta, m, n = spec.beta, spec.m, spec.n
    r = 0.0 if beta == 1 else -beta * n / 2.0
    return (
        -(beta * n * m / 2.0) * math.log(2.0 / beta)
        + (n * n * beta / 2.0 + r) * math.log(math.pi)
        - (beta * n / 2.0) * spec.log_det
        - log_multigamma_beta(n * beta / 2.0, n, beta)
        - log_multigamma_beta(m * beta / 2.0, n, beta)
    )


def joint_density(ells: Sequence[float], spec: WishartSpec, budget: TruncationBudget = TruncationBudget()) -> DistValue:
    """Joint density of the ``n`` nonzero eigenvalues ``l_1 > ... > l_n > 0``.

    The ``0F0^{(beta; m, n)}(-(beta/2) Sigma^{-1}, L)`` factor is evaluated
    after the shift ``-(beta/2) Sigma^{-1} = A - c I`` with ``c = beta/(2 lambda_min)``,
    which turns it into ``etr(-c L) 0F0(A, L)`` with ``A >= 0``: a series of
    nonnegative terms.
    """
    ells = np.asarray(ells, dtype=float).ravel()
    n = spec.n
    if ells.size != n:
        raise ValueError(f"expected {n} eigenvalues, got {ells.size}")
    if np.any(~(ells > 0)) or np.any(np.diff(ells) >= 0):
        raise ValueError("eigenvalues must be positive and strictly decreasing")
    beta, m = spec.beta, spec.m
    shift = beta / (2.0 * spec.eigs[-1])
    A = shift - beta / (2.0 * spec.eigs)
    A[A < 0] = 0.0
    series = hyper_hetero(HypergeomParams((), (), beta), m, n, A, ells, budget)
    log_vdm = math.fsum(
        math.log(ells[i] - ells[j]) for i in range(n) for j in range(i + 1, n)
    )
    log_f = (
        _joint_log_constant(spec)
        + (beta * (m - n + 1) / 2.0 - 1.0) * math.fsum(np.log(ells).tolist())
        + beta * log_vdm
        - shift * math.fsum(ells.tolist())
        + series.log_abs
    )
    return DistValue(math.exp(log_f), series)


def hyp1f1_half_one(z: float) -> float:
    """``log 1F1(1/2; 1; z)`` for ``z >= 0`` by its positive Taylor series."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0:
        return 0.0
    logs = [0.0]
    log_term = 0.0
    log_z = math.log(z)
    k = 0
    while True:
        log_term += math.log(0.5 + k) - 2.0 * math.log(k + 1.0) + log_z
        logs.append(log_term)
        k += 1
        if k > z and log_term < logs[0] + max(logs) - 40.0:
            break
    peak = max(logs)
    return peak + math.log(math.fsum(math.exp(v - peak) for v in logs))


def pdf_m2_nonnull(ell1: float, lambda1: float, lambda2: float) -> float:
    """Density of the largest (only nonzero) eigenvalue for m = 2, n = 1, beta = 1.

    ``f(l) = exp(-l/(2 lambda1)) 1F1(1/2; 1; a) / (2 sqrt(lambda1 lambda2))`` with
    ``a = -(l/2)(1/lambda2 - 1/lambda1) <= 0``; the hypergeometric factor is
    evaluated as ``exp(a) 1F1(1/2; 1; -a)`` so every series term is positive.
    """
    if not (ell1 > 0 and lambda1 > 0 and lambda2 > 0):
        raise ValueError("ell1, lambda1 and lambda2 must be positive")
    if lambda1 < lambda2:
        raise ValueError("need lambda1 >= lambda2")
    a = -0.5 * ell1 * (1.0 / lambda2 - 1.0 / lambda1)
    log_f = -ell1 / (2.0 * lambda1) + a + hyp1f1_half_one(-a) - math.log(2.0 * math.sqrt(lambda1 * lambda2))
    return math.exp(log_f)
