"""numba kernels for Jack polynomial evaluation.

C-normalised Jack polynomials obey the branching rule

    C_kappa(x_1..x_i) = sum_mu  g(kappa, mu) C_mu(x_1..x_{i-1}) x_i^{|kappa|-|mu|}

over partitions ``mu`` with ``kappa / mu`` a horizontal strip.  With
``T`` the set of columns touched by the strip and ``O`` the upper hook on
touched columns and the lower hook elsewhere,

    g(kappa, mu) = alpha^d |kappa|! / |mu|! * prod_{s in mu} O_mu(s) / prod_{s in kappa} O_kappa(s).

Strips are enumerated one box at a time (bottom row first); each box
removal updates ``g`` by a ratio that costs O(rows) because the products
along the shortened row telescope over runs of constant leg length.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def lookup(code, hkeys, hvals, shift, mask):
    i = np.int64((np.uint64(code) * _GOLDEN) >> np.uint64(shift))
    while True:
        k = hkeys[i]
        if k == code:
            return hvals[i]
        if k == -1:
            return -1
        i = (i + 1) & mask


@njit(cache=True)
def build_hash(codes, bits):
    size = 1 << bits
    hkeys = np.full(size, -1, dtype=np.int64)
    hvals = np.full(size, -1, dtype=np.int64)
    shift = 64 - bits
    mask = size - 1
    for idx in range(codes.shape[0]):
        code = codes[idx]
        i = np.int64((np.uint64(code) * _GOLDEN) >> np.uint64(shift))
        while hkeys[i] != -1:
            i = (i + 1) & mask
        hkeys[i] = code
        hvals[i] = idx
    return hkeys, hvals


@njit(cache=True)
def _run(upper, leg, j0, j1, c, alpha):
    # telescoped product over row cells j in (j0, j1] whose arm drops by one
    if j1 <= j0:
        return 1.0
    a_new = c - 1 - j1
    a_old = c - 1 - j0
    if upper:
        return (leg + alpha * (a_new + 1)) / (leg + alpha * (a_old + 1))
    return (leg + 1 + alpha * a_new) / (leg + 1 + alpha * a_old)


@njit(cache=True)
def _box_ratio(kap, mu, r, w, alpha, nrows):
    # g(kappa, mu - e_r) / g(kappa, mu); kap and mu carry a zero sentinel at nrows
    c = mu[r]
    f = alpha * w
    for i in range(r + 1):
        arm = kap[i] - c
        leg = r - i
        f *= (leg + 1 + alpha * arm) / (leg + alpha * (arm + 1))
    for i in range(r):
        arm = mu[i] - c
        leg = r - i
        f *= (leg - 1 + alpha * (arm + 1)) / (leg + 1 + alpha * arm)
    f *= _run(False, 0, kap[r + 1], c - 1, c, alpha)
    s = r + 1
    while s < nrows and kap[s] > 0:
        leg = s - r - 1
        f *= _run(True, leg, mu[s], kap[s], c, alpha)
        f *= _run(False, leg + 1, kap[s + 1], mu[s], c, alpha)
        s += 1
    return f


@njit(cache=True)
def add_variable(P, lengths, weights, codes, mult, hkeys, hvals, shift, mask,
                 prev, y, level, alpha, out):
    """One branching step: values in ``level - 1`` variables -> ``level``."""
    N = P.shape[0]
    nrows = P.shape[1] - 1
    kap = np.zeros(nrows + 1, dtype=np.int64)
    mu = np.zeros(nrows + 1, dtype=np.int64)
    g = np.zeros(nrows + 1)
    for a in range(N):
        ln = lengths[a]
        if ln > level:
            out[a] = 0.0
            continue
        if y == 0.0:
            out[a] = prev[a] if ln < level else 0.0
            continue
        for r in range(nrows + 1):
            kap[r] = P[a, r]
            mu[r] = P[a, r]
        code = codes[a]
        w = weights[a]
        gam = 1.0
        if ln == level:
            # mu must have at most level - 1 rows: strip off row level - 1
            r = level - 1
            while mu[r] > 0:
                gam *= _box_ratio(kap, mu, r, w, alpha, nrows) * y
                mu[r] -= 1
                w -= 1
                code -= mult[r]
        top = min(level - 2, ln - 1)
        acc = gam * prev[lookup(code, hkeys, hvals, shift, mask)]
        if top < 0:
            out[a] = acc
            continue
        for r in range(top + 1):
            g[r] = gam
        r = 0
        while r <= top:
            if mu[r] > kap[r + 1]:
                g[r] *= _box_ratio(kap, mu, r, w, alpha, nrows) * y
                mu[r] -= 1
                w -= 1
                code -= mult[r]
                for i in range(r):
                    g[i] = g[r]
                acc += g[r] * prev[lookup(code, hkeys, hvals, shift, mask)]
                r = 0
            else:
                back = kap[r] - mu[r]
                mu[r] = kap[r]
                w += back
                code += back * mult[r]
                r += 1
        out[a] = acc


@njit(cache=True)
def log_hook_products(P, lengths, alpha):
    """``log j_kappa`` for every row of a padded partition table."""
    N = P.shape[0]
    out = np.zeros(N)
    for a in range(N):
        ln = lengths[a]
        if ln == 0:
            continue
        s = 0.0
        for i in range(ln):
            row = P[a, i]
            for j in range(row):
                # conj[j] = number of rows longer than j
                cj = 0
                while cj < ln and P[a, cj] > j:
                    cj += 1
                leg = cj - i - 1
                arm = row - j - 1
                s += np.log(leg + alpha * (arm + 1)) + np.log(leg + 1 + alpha * arm)
        out[a] = s
    return out
