import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from betawishart.capacity import CapacityQuery, db_to_linear, miso_capacity
from betawishart.eigendist import WishartSpec
from betawishart.hypergeom import TruncationBudget
from betawishart.montecarlo import sample_largest_eigs

ISO3 = WishartSpec(2, 3, 1, (0.69,) * 3)
CORR3 = WishartSpec(2, 3, 1, (1.81, 1.31, 0.69))
DB_GRID = np.linspace(-5.0, 20.0, 20)


def capacity(rho, spec, **kw):
    return miso_capacity(CapacityQuery(rho, spec, **kw))


def test_zero_snr_is_exactly_zero():
    for spec in (ISO3, CORR3):
        assert capacity(0.0, spec) == 0.0


def test_db_conversion():
    assert db_to_linear(0.0) == 1.0
    assert_allclose(db_to_linear(11.0), 10**1.1, rtol=1e-15)


def test_rank_one_isotropic_closed_form():
    # Sigma = I_m, beta = 2, n = 1: l_1 is Gamma(m, 1), so C = E log2(1 + rho G / m)
    from scipy import integrate, stats

    spec = WishartSpec(2, 3, 1, (1.0,) * 3)
    for rho in (0.5, 4.0, 40.0):
        ref, _ = integrate.quad(lambda t: math.log2(1 + rho * t / 3) * stats.gamma.pdf(t, 3), 0, np.inf, epsabs=1e-12)
        assert_allclose(capacity(rho, spec), ref, atol=2e-6)


@pytest.mark.parametrize("spec", [ISO3, CORR3], ids=["iso", "corr"])
def test_monotone_and_concave_in_snr(spec):
    rho = db_to_linear(DB_GRID)
    caps = np.array([capacity(r, spec) for r in rho])
    assert np.all(np.diff(caps) >= 0)
    slopes = np.diff(caps) / np.diff(rho)
    assert np.all(np.diff(slopes) <= 1e-8)


def test_scale_absorption():
    for spec in (ISO3, CORR3):
        for c in (0.5, 3.0):
            a = capacity(2.0, spec)
            b = capacity(2.0 / c, spec.scaled(c))
            assert_allclose(a, b, atol=2e-6)


def test_units():
    bits = capacity(5.0, ISO3)
    nats = capacity(5.0, ISO3, units="nats")
    assert_allclose(nats, bits * math.log(2), atol=2e-6)


@pytest.mark.parametrize("rho", [1.0, 10.0])
def test_against_simulation_isotropic(rho):
    batch = sample_largest_eigs(ISO3, 200_000, seed=31)
    vals = np.log2(1 + rho * batch.draws / 3)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(capacity(rho, ISO3) - vals.mean()) <= 3 * se


def test_insufficient_degree_is_reported():
    from betawishart.eigendist import ConvergenceError

    with pytest.raises(ConvergenceError):
        capacity(1.0, CORR3, budget=TruncationBudget(40))


def test_query_validation():
    with pytest.raises(ValueError):
        CapacityQuery(-1.0, ISO3)
    with pytest.raises(ValueError):
        CapacityQuery(1.0, WishartSpec(1, 3, 1, (1.0,) * 3))
    with pytest.raises(ValueError):
        CapacityQuery(1.0, WishartSpec(2, 3, 2, (1.0,) * 3))
    with pytest.raises(ValueError):
        CapacityQuery(1.0, ISO3, units="dB")
