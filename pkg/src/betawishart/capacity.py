"""Ergodic capacity of a multiple-input single-output (MISO) channel.

With ``m`` transmit antennas, one receive antenna and transmit correlation
``Sigma``, the channel Gram matrix is a rank-one complex (beta = 2) Wishart
matrix and

    C_1 = E[log2(1 + rho l_1 / m)] = int_0^inf log2(1 + rho l / m) f(l) dl,

where ``l_1`` is its nonzero eigenvalue and ``rho`` the linear SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigendist import ConvergenceError, LargestEigenvalueDistribution, WishartSpec, _fitted
from .hypergeom import TruncationBudget

__all__ = ["CapacityQuery", "miso_capacity", "db_to_linear", "tail_cutoff"]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class CapacityQuery:
    """Inputs of :func:`miso_capacity`.

    Parameters
    ----------
    rho : float
        Linear signal-to-noise ratio, ``rho >= 0``.
    spec : WishartSpec
        Must have ``beta = 2`` and ``n = 1``.
    budget : TruncationBudget
        Series truncation for the eigenvalue density.
    nodes : int
        Initial Gauss-Legendre node count (doubled until converged).
    max_nodes : int
    tail : float
        The domain ``[0, x_max]`` is cut where ``F(x_max) >= 1 - tail``.
    tol : float
        Stop doubling once successive estimates differ by less than this.
    units : {"bits", "nats"}
    """

    rho: float
    spec: WishartSpec
    budget: TruncationBudget = TruncationBudget(200)
    nodes: int = 32
    max_nodes: int = 4096
    tail: float = 1e-8
    tol: float = 1e-6
    units: str = "bits"

    def __post_init__(self):
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be a nonnegative finite number, got {self.rho}")
        if self.spec.beta != 2 or self.spec.n != 1:
            raise ValueError("MISO capacity needs a spec with beta=2 and n=1")
        if self.units not in ("bits", "nats"):
            raise ValueError("units must be 'bits' or 'nats'")
        if self.nodes < 2 or self.max_nodes < self.nodes:
            raise ValueError("need 2 <= nodes <= max_nodes")


def tail_cutoff(dist: LargestEigenvalueDistribution, tail: float) -> float:
    """A point ``x`` with ``F_K(x) >= 1 - tail``.

    Doubles from ``tr(Sigma)``; once the truncated CDF starts to fall, the
    last interval is scanned on a fine grid before giving up.
    """
    x = float(np.sum(dist.spec_.eigs))
    target = 1.0 - tail
    best, lo = 0.0, 0.0
    while True:
        v = float(dist.cdf(x)[0])
        if v >= target:
            return x
        if v < best:
            grid = np.linspace(lo, x, 2001)[1:]
            vals = dist.cdf(grid)
            hit = np.nonzero(vals >= target)[0]
            if hit.size:
                return float(grid[hit[0]])
            raise ConvergenceError(
                f"truncated CDF peaks below 1 - {tail:g} (reached {vals.max():.12f}); "
                f"increase max_degree beyond {dist.layers_.max_degree}"
            )
        best, lo = v, x / 2.0
        x *= 2.0


def miso_capacity(query: CapacityQuery) -> float:
    """Gauss-Legendre evaluation of ``C_1`` over ``[0, x_max]``.

    >>> from betawishart.eigendist import WishartSpec
    >>> miso_capacity(CapacityQuery(0.0, WishartSpec.from_sigma(2, 1, None, 2)))
    0.0
    """
    if query.rho == 0:
        return 0.0
    spec = query.spec
    dist = _fitted(spec, query.budget)
    x_max = tail_cutoff(dist, query.tail)
    scale = 1.0 / math.log(2.0) if query.units == "bits" else 1.0

    def estimate(nodes):
        t, w = np.polynomial.legendre.leggauss(nodes)
        x = 0.5 * x_max * (t + 1.0)
        return 0.5 * x_max * float(np.sum(w * log1p_scaled(x) * dist.pdf(x)))

    def log1p_scaled(x):
        return scale * np.log1p(query.rho * x / spec.m)

    nodes = query.nodes
    prev = estimate(nodes)
    while nodes < query.max_nodes:
        nodes *= 2
        cur = estimate(nodes)
        if abs(cur - prev) < query.tol:
            return cur
        prev = cur
    raise ConvergenceError(f"quadrature did not settle within {query.max_nodes} nodes")
