import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from multiconn import kernels
from multiconn import pointprocess as pp
from multiconn._accel import HAS_NUMBA

PLAIN = pp.Region(100.0, 80.0)
TORUS = pp.Region(100.0, 80.0, pp.Boundary.TORUS)


def test_region():
    assert PLAIN.area == 8000.0 and not PLAIN.torus
    assert TORUS.torus
    for w, h in [(0, 1), (1, 0), (-1, 5)]:
        with pytest.raises(ValueError):
            pp.Region(w, h)


def test_nearest_example():
    users = pp.PointSet(np.array([[0.0, 0.0]]))
    bss = pp.PointSet(np.array([[3.0, 0.0], [0.0, 1.0], [2.0, 0.0]]))
    a = pp.k_nearest(users, bss, 3, pp.Region(10, 10))
    assert a.bs_index.tolist() == [[1, 2, 0]]
    assert a.distance.tolist() == [[1.0, 2.0, 3.0]]
    assert a.degree.tolist() == [1, 1, 1]
    assert (a.k, a.n_users, a.n_bs) == (3, 1, 3)


def test_torus_wraps():
    users = pp.PointSet(np.array([[0.5, 5.0]]))
    bss = pp.PointSet(np.array([[9.5, 5.0], [3.0, 5.0]]))
    plain = pp.k_nearest(users, bss, 1, pp.Region(10, 10))
    torus = pp.k_nearest(users, bss, 1, pp.Region(10, 10, pp.Boundary.TORUS))
    assert plain.distance[0, 0] == pytest.approx(2.5)
    assert torus.distance[0, 0] == pytest.approx(1.0)
    assert torus.bs_index[0, 0] == 0


def _random_instance(rng, torus):
    w, h = rng.uniform(20, 200, 2)
    nb = int(rng.integers(5, 300))
    nu = int(rng.integers(1, 200))
    k = int(rng.integers(1, min(nb, 7) + 1))
    ux, uy = rng.uniform(0, w, nu), rng.uniform(0, h, nu)
    bx, by = rng.uniform(0, w, nb), rng.uniform(0, h, nb)
    return ux, uy, bx, by, k, w, h, torus


@pytest.mark.parametrize("use_numba", [False] + ([True] if HAS_NUMBA else []))
def test_grid_equals_brute_force(use_numba):
    rng = np.random.default_rng(11)
    for i in range(200):
        ux, uy, bx, by, k, w, h, torus = _random_instance(rng, torus=bool(i % 2))
        cell = rng.uniform(2.0, 60.0) if i % 3 == 0 else None
        bi, bd = kernels.knn_brute(ux, uy, bx, by, k, w, h, torus)
        gi, gd = kernels.knn_grid(ux, uy, bx, by, k, w, h, torus, cell_size=cell, use_numba=use_numba)
        assert np.array_equal(bi, gi)
        assert np.array_equal(bd, gd)


def test_brute_force_matches_direct_distances():
    rng = np.random.default_rng(3)
    ux, uy, bx, by, k, w, h, _ = _random_instance(rng, torus=True)
    d2 = kernels.squared_distances(ux, uy, bx, by, w, h, True)
    idx, dd = kernels.knn_brute(ux, uy, bx, by, k, w, h, True)
    assert np.allclose(np.sort(d2, axis=1)[:, :k], dd)
    dx = np.abs(ux[:, None] - bx[None, :])
    dy = np.abs(uy[:, None] - by[None, :])
    ref = np.minimum(dx, w - dx) ** 2 + np.minimum(dy, h - dy) ** 2
    assert np.allclose(d2, ref)


@settings(max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 5), torus=st.booleans())
def test_knn_properties(seed, k, torus):
    region = pp.Region(120.0, 90.0, pp.Boundary.TORUS if torus else pp.Boundary.PLAIN)
    users = pp.sample_ppp(0.005, region, seed)
    bss = pp.sample_ppp(0.003, region, seed + 1)
    if bss.count < k:
        return
    a = pp.k_nearest(users, bss, k, region)
    # sorted, distinct, degrees count every link once
    assert np.all(np.diff(a.distance, axis=1) >= 0)
    assert all(len(set(row)) == k for row in a.bs_index.tolist())
    assert a.degree.sum() == users.count * k
    if torus:
        assert np.all(a.distance <= math.hypot(60.0, 45.0) + 1e-12)


def test_csv_roundtrip(tmp_path):
    pts = pp.sample_ppp(0.01, PLAIN, 5)
    f = tmp_path / "pts.csv"
    pts.to_csv(f)
    assert f.read_text().splitlines()[0] == "id,x,y"
    back = pp.PointSet.from_csv(f)
    assert np.array_equal(back.coords, pts.coords)


def test_sampling_is_deterministic():
    a = pp.sample_ppp(0.01, PLAIN, 42)
    b = pp.sample_ppp(0.01, PLAIN, 42)
    c = pp.sample_ppp(0.01, PLAIN, 43)
    assert np.array_equal(a.coords, b.coords)
    assert not np.array_equal(a.coords[:5], c.coords[:5])
    assert np.all((a.x >= 0) & (a.x <= PLAIN.width) & (a.y >= 0) & (a.y <= PLAIN.height))


def test_poisson_counts():
    region = pp.Region(50.0, 40.0)
    counts = np.array([pp.sample_ppp(0.01, region, s).count for s in range(1000)])
    mean = 0.01 * region.area
    assert abs(counts.mean() - mean) < 4 * math.sqrt(mean / counts.size)
    # dispersion index of a Poisson sample is chi2(n-1)/(n-1)
    disp = counts.var(ddof=1) / counts.mean() * (counts.size - 1)
    lo, hi = stats.chi2.ppf([0.0005, 0.9995], counts.size - 1)
    assert lo < disp < hi


def test_nearest_distance_law_ks():
    # many small independent tori so that users are (nearly) independent samples
    lam_bs, k = 0.01, 3
    region = pp.Region(100.0, 100.0, pp.Boundary.TORUS)
    per_rank = [[] for _ in range(k)]
    for s in range(1000):
        bss = pp.sample_ppp(lam_bs, region, (s, 0))
        users = pp.sample_ppp(0.01, region, (s, 1))
        if users.count == 0:
            continue
        a = pp.k_nearest(users, bss, k, region)
        for j in range(k):
            per_rank[j].append(a.distance[:, j])
    for j in range(k):
        r = np.concatenate(per_rank[j])
        res = stats.kstest(r, lambda x: special.gammainc(j + 1, lam_bs * math.pi * np.asarray(x) ** 2))
        assert r.size > 90_000
        assert res.pvalue > 1e-3, (j + 1, res.statistic)


def test_empirical_distance_cdf():
    users = pp.PointSet(np.array([[0.0, 0.0], [10.0, 0.0]]))
    bss = pp.PointSet(np.array([[1.0, 0.0], [10.0, 3.0], [0.0, 2.0]]))
    a = pp.k_nearest(users, bss, 2, pp.Region(20, 20))
    r, f = pp.empirical_distance_cdf(a, 1)
    assert r.tolist() == [1.0, 3.0]
    assert f.tolist() == [0.5, 1.0]
    with pytest.raises(ValueError):
        pp.empirical_distance_cdf(a, 3)


def test_errors():
    with pytest.raises(ValueError):
        pp.sample_ppp(0.0, PLAIN, 1)
    users = pp.sample_ppp(0.01, PLAIN, 1)
    bss = pp.PointSet(np.array([[1.0, 1.0], [2.0, 2.0]]))
    with pytest.raises(ValueError, match="short by 1"):
        pp.k_nearest(users, bss, 3, PLAIN)
    with pytest.raises(ValueError):
        pp.k_nearest(users, bss, 0, PLAIN)
    with pytest.raises(ValueError):
        pp.k_nearest(users, bss, 1, PLAIN, method="kd")


def test_make_rng_accepts_seed_forms():
    g = np.random.default_rng(1)
    assert pp.make_rng(g) is g
    a = pp.make_rng(5).random()
    b = pp.make_rng(np.random.SeedSequence(5)).random()
    assert a == b


def test_env_flag_disables_numba():
    code = ("import multiconn._accel as a, multiconn.kernels as k; "
            "print(a.HAS_NUMBA, a.DISABLED_BY_ENV)")
    env = dict(os.environ, MULTICONN_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]


@pytest.mark.parametrize("method,use_numba", [("brute", None), ("grid", False)] + ([("grid", True)] if HAS_NUMBA else []))
def test_ties_break_by_lowest_index(method, use_numba):
    users = pp.PointSet(np.array([[5.0, 5.0]]))
    bss = pp.PointSet(np.array([[9.0, 9.0], [5.0, 3.0], [7.0, 5.0], [3.0, 5.0], [5.0, 7.0]]))
    a = pp.k_nearest(users, bss, 4, pp.Region(10, 10), method=method, use_numba=use_numba)
    assert a.bs_index.tolist() == [[1, 2, 3, 4]]
