import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multiconn import analytic as an
from multiconn import specialfn as sf
from oracles import expected_log_snr_quad, sample_rank_distances, snr_mass_total

GRID = list(itertools.product(range(1, 6), (2.0, 3.0, 4.0), (1e-4, 1e-2), (1e2, 10 ** 3.5)))


def test_defaults():
    p = an.NetworkParams()
    assert p.k == 1 and p.alpha == 2.0
    assert p.phi == pytest.approx(1e-2 * math.pi * 10 ** 3.5)
    assert p.lambda_ratio == pytest.approx(10.0)
    assert p.w_bs == pytest.approx(10.0)
    assert p.bandwidth_factor == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [dict(lambda_bs=0), dict(alpha=-1), dict(c=math.inf),
                                 dict(k=0), dict(k=1.5), dict(k=True), dict(lambda_u="x")])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        an.NetworkParams(**bad)


@pytest.mark.parametrize("j,alpha,lam,c", GRID)
def test_exact_matches_quadrature(j, alpha, lam, c):
    p = an.NetworkParams(lambda_bs=lam, alpha=alpha, c=c)
    got = an.expected_log_snr_exact(j, p)
    ref = expected_log_snr_quad(j, lam, alpha, c)
    assert got.value == pytest.approx(ref, rel=1e-6)
    assert got.error_bound < 1e-6 * abs(got.value)


@pytest.mark.parametrize("j,alpha,lam,c", GRID[::3])
def test_snr_law_normalised(j, alpha, lam, c):
    p = an.NetworkParams(lambda_bs=lam, alpha=alpha, c=c)
    assert snr_mass_total(j, p) == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(j=st.integers(1, 5), alpha=st.floats(2.0, 5.0), lexp=st.floats(-4, -1), cexp=st.floats(1.5, 4.5))
def test_snr_law_normalised_property(j, alpha, lexp, cexp):
    p = an.NetworkParams(lambda_bs=10 ** lexp, alpha=alpha, c=10 ** cexp)
    assert snr_mass_total(j, p) == pytest.approx(1.0, abs=1e-8)


def test_snr_cdf_consistent_with_pdf():
    p = an.NetworkParams()
    from scipy import integrate
    for j in (1, 3):
        x0, x1 = 0.5, 300.0
        mass, _ = integrate.quad(lambda x: an.snr_pdf(j, x, p), x0, x1, epsrel=1e-11, limit=200)
        assert an.snr_cdf(j, x1, p) - an.snr_cdf(j, x0, p) == pytest.approx(mass, rel=1e-8)
        assert an.snr_cdf(j, p.c, p) == 1.0
        assert an.snr_cdf(j, 0.0, p) == 0.0
        below = an.snr_cdf(j, np.nextafter(p.c, 0), p)
        assert 1.0 - below == pytest.approx(an.snr_point_mass(j, p), rel=1e-9)


def test_distance_law():
    p = an.NetworkParams()
    # R_1 is Rayleigh: P(R_1 > r) = exp(-lambda pi r^2)
    r = np.array([0.0, 1.0, 5.0, 10.0, 20.0])
    assert np.allclose(an.distance_tail(1, r, p), np.exp(-p.lambda_bs * math.pi * r ** 2), rtol=1e-14)
    from scipy import integrate
    for j in (1, 2, 5):
        tot, _ = integrate.quad(lambda x: an.distance_pdf(j, x, p), 0, np.inf, limit=200)
        assert tot == pytest.approx(1.0, abs=1e-9)
        head, _ = integrate.quad(lambda x: an.distance_pdf(j, x, p), 0, 7.0, limit=200)
        assert 1.0 - an.distance_tail(j, 7.0, p) == pytest.approx(head, rel=1e-9)


def test_monte_carlo_agrees_with_exact():
    p = an.NetworkParams()
    rng = np.random.default_rng(2024)
    r = sample_rank_distances(rng, 400_000, 5, p.lambda_bs)
    snr = p.c * np.maximum(r, 1.0) ** -p.alpha
    vals = np.log2(1.0 + snr)
    for j in range(1, 6):
        x = vals[:, j - 1]
        se = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean() - an.expected_log_snr(j, p)) < 4 * se


@pytest.mark.parametrize("alpha,lam,c", list(itertools.product((2.0, 4.0), (1e-4, 1e-2), (1e2, 1e4))))
def test_decreasing_in_rank(alpha, lam, c):
    p = an.NetworkParams(lambda_bs=lam, alpha=alpha, c=c)
    vals = [an.expected_log_snr(j, p) for j in range(1, 8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_approximation_closed_form():
    p = an.NetworkParams(c=12800.0)
    a1 = an.expected_log_snr_approx(1, p)
    assert a1.valid
    assert a1.value == pytest.approx((math.log(p.phi) + sf.EULER_GAMMA - p.lambda_bs * math.pi) / an.LN2)
    # consecutive ranks differ by alpha / (2 ln 2) / (j - 1) for j >= 3
    for j in range(3, 8):
        d = an.expected_log_snr_approx(j - 1, p).value - an.expected_log_snr_approx(j, p).value
        assert d == pytest.approx(1.0 / (an.LN2 * (j - 1)), rel=1e-12)


def test_approximation_flags_invalid_region():
    assert not an.expected_log_snr_approx(1, an.NetworkParams(lambda_bs=0.5)).valid
    assert not an.expected_log_snr_approx(1, an.NetworkParams(lambda_bs=1e-4, c=10.0)).valid


@pytest.mark.parametrize("j", [1, 2, 5])
def test_approximation_error_shrinks_with_c(j):
    errs = []
    for cexp in (3, 4, 5, 6):
        p = an.NetworkParams(c=10.0 ** cexp)
        errs.append(abs(an.expected_log_snr_approx(j, p).value / an.expected_log_snr(j, p) - 1))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 5e-3


def test_approx_sum_equals_sum_of_approx_links():
    for k in range(1, 8):
        p = an.NetworkParams(k=k, lambda_bs=3e-3)
        m = an.expected_sum_capacity(p, an.Method.APPROX)
        assert m.sum == pytest.approx(math.fsum(m.per_link), rel=1e-12)
        assert m.method is an.Method.APPROX


def test_capacity_linear_in_bandwidth_and_k_scaling():
    p = an.NetworkParams(k=3)
    base = an.expected_sum_capacity(p)
    double = an.expected_sum_capacity(p.replace(w_tot_density=0.2))
    assert double.sum == pytest.approx(2 * base.sum, rel=1e-14)
    assert base.sum == pytest.approx(math.fsum(base.per_link), rel=1e-15)
    # per-link bandwidth W / (k lambda_u)
    for j in (1, 2, 3):
        assert an.expected_capacity_per_link(j, p) == pytest.approx(
            p.w_tot_density / (3 * p.lambda_u) * an.expected_log_snr(j, p), rel=1e-14)
    with pytest.raises(ValueError):
        an.expected_capacity_per_link(4, p)


def test_capacity_decreasing_in_k_witnesses():
    w = an.sum_capacity_is_decreasing(an.NetworkParams(), 5)
    assert w.decreasing and w.guaranteed and len(w.capacities) == 5
    big = an.sum_capacity_is_decreasing(an.NetworkParams(lambda_bs=0.4), 5)
    assert not big.guaranteed
    single = an.sum_capacity_is_decreasing(an.NetworkParams(), 1)
    assert single.decreasing and len(single.capacities) == 1


@settings(max_examples=25, deadline=None)
@given(lexp=st.floats(-4.0, math.log10(0.99 / math.pi)), alpha=st.floats(2.0, 4.0))
def test_capacity_decreasing_in_k_property(lexp, alpha):
    p = an.NetworkParams(lambda_bs=10 ** lexp, alpha=alpha)
    assert an.sum_capacity_is_decreasing(p, 6).decreasing
    exact = [an.expected_sum_capacity(p.replace(k=k)).sum for k in range(1, 7)]
    assert all(b < a for a, b in zip(exact, exact[1:]))


def test_rank_must_be_positive():
    p = an.NetworkParams()
    with pytest.raises(ValueError):
        an.expected_log_snr_exact(0, p)
    with pytest.raises(ValueError):
        an.expected_log_snr_approx(0, p)
    with pytest.raises(ValueError):
        an.snr_pdf(0, 1.0, p)
