import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from multiconn import metrics as mt


def test_empirical_cdf_example():
    x, f = mt.empirical_cdf([3.0, 1.0, 2.0, 2.0])
    assert x.tolist() == [1.0, 2.0, 3.0]
    assert f.tolist() == [0.25, 0.75, 1.0]
    with pytest.raises(ValueError):
        mt.empirical_cdf([])


@settings(max_examples=60)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200))
def test_empirical_cdf_properties(v):
    x, f = mt.empirical_cdf(v)
    assert np.all(np.diff(x) > 0)
    assert np.all(np.diff(f) > 0)
    assert f[-1] == 1.0
    # right-continuity: F(x_i) counts ties at x_i
    arr = np.asarray(v)
    for xi, fi in zip(x[:5], f[:5]):
        assert fi == pytest.approx(np.mean(arr <= xi))


def test_wilson_interval():
    lo, hi = mt.wilson_interval(0, 100)
    assert lo == 0.0 and 0.03 < hi < 0.04
    lo, hi = mt.wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    with pytest.raises(ValueError):
        mt.wilson_interval(1, 0)


def test_wilson_coverage():
    # coverage of the 95% interval for p = 0.2, n = 400 is close to nominal
    rng = np.random.default_rng(0)
    hits = 0
    for x in rng.binomial(400, 0.2, size=4000):
        lo, hi = mt.wilson_interval(int(x), 400)
        hits += lo <= 0.2 <= hi
    assert 0.93 < hits / 4000 < 0.97


def test_ks_against_scipy():
    rng = np.random.default_rng(1)
    x = rng.exponential(size=500)
    d = mt.ks_statistic(x, stats.expon.cdf)
    assert d == pytest.approx(stats.kstest(x, "expon").statistic, rel=1e-12)
    assert mt.ks_critical(10_000, 0.05) == pytest.approx(1.3581 / 100, rel=1e-3)


def test_total_variation():
    assert mt.total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert mt.total_variation([1.0], [0.0, 1.0]) == 1.0
    assert mt.total_variation([0.2, 0.8], [0.5, 0.3, 0.2]) == pytest.approx(0.5)


def test_coefficient_of_variation():
    assert mt.coefficient_of_variation([2, 2, 2]) == 0.0
    assert mt.coefficient_of_variation([1, 3]) == pytest.approx(0.5)


def test_sweep_grids():
    assert mt.SWEEPS["random"][0] == 0.0 and mt.SWEEPS["random"][-1] == pytest.approx(0.9)
    assert len(mt.SWEEPS["overload"]) == 9
    assert all(v > 0 for v in mt.SWEEPS["distance"])


def test_loss_table():
    # C(k, s) = s / k: loss 1 - 1/k at every sweep point
    table = mt.loss_table({"a": lambda k, s: s / k, "b": lambda k, s: s * (1 + (k - 1) * s)},
                          sweeps={"a": [1.0, 2.0], "b": [0.1, 0.5]})
    assert table.rows["a"][2] == pytest.approx((0.5, 0.5))
    assert table.rows["b"][3] == pytest.approx((-1.0, -0.2))
    text = table.to_text()
    assert "50.0%" in text and "-100.0 / -20.0%" in text
    lines = table.to_csv().splitlines()
    assert lines[0] == "row,k,min_loss,max_loss" and len(lines) == 1 + 2 * 4
    with pytest.raises(ValueError):
        mt.loss_table({"z": lambda k, s: 0.0})
