"""Seeded Monte Carlo sampling of singular beta-Wishart eigenvalues.

Entry convention: every entry of ``X`` has ``beta`` real components, each an
independent Gaussian with variance ``1/beta``, so ``E|x_ij|^2 = 1`` for all
three fields.  This matches a density proportional to
``etr(-(beta/2) Sigma^{-1} X X^*)``.  Rows are colored by ``Sigma^{1/2}``; as
only the spectrum of ``Sigma`` matters, ``Sigma`` is taken diagonal.

Quaternions are represented by their 2 x 2 complex blocks
``q = a + b i + c j + d k  ->  [[a + b i, c + d i], [-c + d i, a - b i]]``.

Random numbers come from numpy's counter-based ``Philox`` generator.  A batch
is cut into fixed-size chunks, each seeded from ``SeedSequence(seed).spawn``,
so the draws depend only on ``(spec, seed, count)``.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .eigendist import WishartSpec
from .jack import as_spectrum, jack_c, jack_identity_value
from .partitions import Partition

__all__ = [
    "SampleBatch",
    "CHUNK",
    "gaussian_matrices",
    "quaternion_embed",
    "sample_largest_eigs",
    "sample_embedded_spectra",
    "empirical_cdf",
    "ks_distance",
    "haar_stiefel",
    "stiefel_splitting_check",
    "joint_density_mc_integral",
    "batch_csv_text",
    "write_batch_csv",
]

CHUNK = 8192


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Largest eigenvalues of ``count`` independent draws of ``W``."""

    draws: np.ndarray
    spec: WishartSpec
    seed: int
    count: int

    def __post_init__(self):
        if self.draws.shape != (self.count,):
            raise ValueError("count must equal the number of draws")

    def sorted(self) -> np.ndarray:
        return np.sort(self.draws)


def _generators(seed: int, count: int):
    n_chunks = max(1, -(-count // CHUNK))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for i, child in enumerate(children):
        size = min(CHUNK, count - i * CHUNK)
        yield np.random.Generator(np.random.Philox(child)), size


def gaussian_matrices(rng: np.random.Generator, size: int, rows: int, cols: int, beta: int) -> np.ndarray:
    """``size`` beta-Gaussian ``rows x cols`` matrices with unit-modulus variance.

    beta = 1 and 2 give real / complex arrays; beta = 4 gives the
    ``2 rows x 2 cols`` complex embedding of a quaternion matrix.
    """
    shape = (size, rows, cols)
    if beta == 1:
        return rng.standard_normal(shape)
    sd = math.sqrt(1.0 / beta)
    if beta == 2:
        return sd * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    if beta == 4:
        a, b, c, d = (sd * rng.standard_normal(shape) for _ in range(4))
        return quaternion_embed(a, b, c, d)
    raise ValueError(f"beta must be 1, 2 or 4, got {beta}")


def quaternion_embed(a, b, c, d) -> np.ndarray:
    """Complex ``2p x 2q`` embedding of the quaternion matrix ``a + b i + c j + d k``."""
    top = np.concatenate([a + 1j * b, c + 1j * d], axis=-1)
    bottom = np.concatenate([-c + 1j * d, a - 1j * b], axis=-1)
    # interleave so that entry (r, s) becomes the 2 x 2 block at (2r, 2s)
    p, q = a.shape[-2], a.shape[-1]
    out = np.empty(a.shape[:-2] + (2 * p, 2 * q), dtype=complex)
    out[..., 0::2, 0::2] = top[..., :q]
    out[..., 0::2, 1::2] = top[..., q:]
    out[..., 1::2, 0::2] = bottom[..., :q]
    out[..., 1::2, 1::2] = bottom[..., q:]
    return out


def _colored(rng, size, spec: WishartSpec) -> np.ndarray:
    X = gaussian_matrices(rng, size, spec.m, spec.n, spec.beta)
    root = np.sqrt(spec.eigs)
    if spec.beta == 4:
        root = np.repeat(root, 2)
    return X * root[None, :, None]


def sample_largest_eigs(spec: WishartSpec, count: int, seed: int) -> SampleBatch:
    """Draw ``count`` largest eigenvalues of ``W = X X^*``.

    The nonzero eigenvalues of ``X X^*`` are those of the small Gram matrix
    ``X^* X``; for beta = 4 its embedded spectrum lists each of them twice,
    so the maximum is unaffected by the pairing.
    """
    if count < 1:
        raise ValueError("count must be positive")
    out = np.empty(count)
    pos = 0
    for rng, size in _generators(seed, count):
        X = _colored(rng, size, spec)
        G = np.conj(np.swapaxes(X, -1, -2)) @ X
        ev = np.linalg.eigvalsh(G)
        out[pos:pos + size] = ev[:, -1]
        pos += size
    return SampleBatch(out, spec, int(seed), int(count))


def sample_embedded_spectra(spec: WishartSpec, count: int, seed: int) -> np.ndarray:
    """Full ascending spectrum of the Hermitian matrix representing ``W``.

    For beta = 4 this is the ``2m``-dimensional embedding, whose eigenvalues
    come in equal pairs.
    """
    rows = []
    for rng, size in _generators(seed, count):
        X = _colored(rng, size, spec)
        W = X @ np.conj(np.swapaxes(X, -1, -2))
        rows.append(np.linalg.eigvalsh(W))
    return np.concatenate(rows)[:count]


def empirical_cdf(batch: SampleBatch, x) -> float:
    """Fraction of draws ``<= x``."""
    s = batch.sorted()
    return float(np.searchsorted(s, x, side="right")) / batch.count


def ks_distance(batch: SampleBatch | np.ndarray, cdf: Callable) -> float:
    """Two-sided Kolmogorov-Smirnov distance ``sup |F_n - F|``.

    ``cdf`` is called once with the sorted draws as an array.
    """
    draws = batch.draws if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    s = np.sort(draws)
    n = s.size
    F = np.asarray(cdf(s), dtype=float).reshape(n)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def haar_stiefel(rng: np.random.Generator, size: int, m: int, n: int, beta: int) -> np.ndarray:
    """``size`` Haar-distributed ``m x n`` frames with orthonormal columns.

    QR of a Gaussian matrix, with the columns rescaled by the phases of
    ``diag(R)`` so that the distribution is exactly invariant.
    """
    Z = gaussian_matrices(rng, size, m, n, beta)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return Q * phase[:, None, :]


def stiefel_splitting_check(A, B, kappa: Sequence[int], beta_param: int, count: int, seed: int):
    """Monte Carlo check of ``E C_kappa(A H B H^*) = C_kappa(A) C_kappa(B) / C_kappa(I_m)``.

    Returns
    -------
    mc_mean, exact, std_err : float
    """
    A = as_spectrum(A)
    B = as_spectrum(B)
    kappa = Partition(kappa)
    m, n = A.size, B.size
    if m < n:
        raise ValueError("need dim(A) >= dim(B)")
    if kappa.length > n:
        raise ValueError("kappa is longer than dim(B)")
    if beta_param not in (1, 2):
        raise ValueError("the splitting check supports beta in {1, 2}")
    exact = jack_c(kappa, A, beta_param) * jack_c(kappa, B, beta_param) / jack_identity_value(kappa, m, beta_param)
    vals = np.empty(count)
    pos = 0
    for rng, size in _generators(seed, count):
        H = haar_stiefel(rng, size, m, n, beta_param)
        # nonzero eigenvalues of A H B H^* are those of the n x n matrix B H^* A H
        M = B[None, :, None] * (np.conj(np.swapaxes(H, -1, -2)) @ (A[None, :, None] * H))
        ev = np.linalg.eigvals(M).real
        for t in range(size):
            vals[pos + t] = jack_c(kappa, ev[t], beta_param)
        pos += size
    return float(vals.mean()), float(exact), float(vals.std(ddof=1) / math.sqrt(count))


def joint_density_mc_integral(
    density: Callable, spec: WishartSpec, count: int, seed: int, box: float, replicates: int = 8
):
    """Randomised quasi-Monte Carlo integral of a joint eigenvalue density.

    The domain is ``box > l_1 > ... > l_n > 0``.  Each of ``replicates``
    independently scrambled Sobol sequences supplies ``count // replicates``
    points in ``[0, box]^n``.  Sorting each point maps the cube onto the
    ordered simplex, whose volume is ``box^n / n!``.  The standard error
    comes from the spread of the replicate means.

    Returns
    -------
    estimate, std_err : float
    """
    n = spec.n
    per = max(2, count // replicates)
    vol = box**n / math.factorial(n)
    means = []
    for child in np.random.SeedSequence(seed).spawn(replicates):
        sobol = qmc.Sobol(d=n, scramble=True, seed=np.random.Generator(np.random.Philox(child)))
        pts = -np.sort(-box * sobol.random(per), axis=1)
        means.append(vol * math.fsum(density(p) for p in pts) / per)
    means = np.asarray(means)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(replicates))


def batch_csv_text(batch: SampleBatch) -> str:
    """Single-column CSV of the draws with a ``#`` header recording spec, seed and count."""
    spec = batch.spec
    sigma = ",".join(repr(v) for v in spec.sigma_eigs)
    header = (
        f"# beta={spec.beta} m={spec.m} n={spec.n} sigma={sigma} "
        f"seed={batch.seed} count={batch.count}\nl1\n"
    )
    return header + "".join(repr(float(v)) + "\n" for v in batch.draws)


def write_batch_csv(batch: SampleBatch, path) -> None:
    """Write :func:`batch_csv_text` to ``path`` atomically."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(batch_csv_text(batch))
    os.replace(tmp, path)
