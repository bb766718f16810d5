"""Figure and table reproductions with machine-checkable verdicts.

Every target returns CSV rows, plot panels and a list of checks.  A check
records (expected, got, tolerance, pass); the target passes when all do.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytic, failures, metrics, simulator
from .analytic import NetworkParams
from .failures import FailureModel
from .pointprocess import Boundary

K_RANGE = (1, 2, 3, 4, 5)

# capacity loss relative to k = 1, in percent, for k = 2..5 (min, max)
REFERENCE_LOSS_TABLE = {
    "no_failure": [(10.0, 10.0), (16.8, 16.8), (21.7, 21.7), (25.6, 25.6)],
    "random": [(8.7, 10.8), (15.5, 17.4), (20.7, 22.2), (24.1, 26.1)],
    "overload": [(10.0, 89.0), (16.8, 96.3), (21.7, 98.7), (25.6, 99.2)],
    "distance": [(10.0, 36.0), (16.8, 56.2), (21.7, 67.5), (25.6, 74.3)],
    "los": [(10.0, 32.6), (16.8, 48.4), (21.7, 57.9), (25.6, 63.9)],
    "random_realloc": [(-52.5, 10.0), (-82.8, 16.8), (-96.0, 21.7), (-105.9, 25.6)],
    "overload_realloc": [(10.0, 89.0), (16.8, 96.3), (21.7, 98.7), (25.6, 99.2)],
    "distance_realloc": [(1.5, 10.0), (2.1, 16.8), (2.3, 21.7), (2.3, 25.6)],
    "los_realloc": [(3.9, 10.0), (8.8, 16.8), (12.6, 21.7), (15.5, 25.6)],
}
REFERENCE_JAIN = {1: 0.52, 5: 0.89}


@dataclass
class Check:
    name: str
    expected: object
    got: object
    tolerance: float
    passed: bool

    def as_dict(self):
        return {"name": self.name, "expected": self.expected, "got": self.got,
                "tolerance": self.tolerance, "pass": bool(self.passed)}


def check_abs(name, expected, got, tol):
    return Check(name, expected, got, tol, bool(abs(got - expected) <= tol))


def check_rel(name, expected, got, tol):
    return Check(name, expected, got, tol, bool(abs(got - expected) <= tol * abs(expected)))


def check_true(name, cond, detail=None):
    return Check(name, True, detail if detail is not None else bool(cond), 0.0, bool(cond))


@dataclass
class Context:
    params: NetworkParams
    region: object
    replications: int
    seed: int


@dataclass
class Result:
    rows: list
    panels: list
    checks: list = field(default_factory=list)
    title: str = ""

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def _analytic_sum(p):
    return analytic.expected_sum_capacity(p).sum


# -- no-failure capacity vs lambda_bs --------------------------------------

def no_failure_capacity(ctx: Context) -> Result:
    lam_line = np.logspace(-4, -1, 25)
    lam_sim = (1e-4, 1e-3, 1e-2, 1e-1)
    rows, series_a, series_s = [], [], []
    sim_at = {}
    for k in K_RANGE:
        ys = [_analytic_sum(ctx.params.replace(lambda_bs=float(l), k=k)) for l in lam_line]
        series_a.append({"x": lam_line, "y": ys, "label": f"k={k}", "c": k - 1})
        for l, y in zip(lam_line, ys):
            rows.append({"k": k, "lambda_bs": float(l), "kind": "analytic", "capacity": y})
    for l in lam_sim:
        p = ctx.params.replace(lambda_bs=l)
        cap, _, _ = simulator.sweep_mean_capacity(p, ctx.region, [None], K_RANGE,
                                               replications=ctx.replications, seed=ctx.seed)
        for a, k in enumerate(K_RANGE):
            sim_at[(l, k)] = cap[a, 0]
            rows.append({"k": k, "lambda_bs": l, "kind": "simulated", "capacity": cap[a, 0]})
    for k in K_RANGE:
        series_s.append({"x": lam_sim, "y": [sim_at[(l, k)] for l in lam_sim], "style": "markers", "c": k - 1})

    checks = []
    for k in K_RANGE:
        an = _analytic_sum(ctx.params.replace(k=k))
        tol = 0.10 if k <= 2 else 0.05
        checks.append(check_rel(f"sim_vs_analytic_k{k}_lambda1e-2", an, sim_at[(1e-2, k)], tol))
    sims = [sim_at[(1e-2, k)] for k in K_RANGE]
    checks.append(check_true("simulated_capacity_decreasing_in_k",
                             all(b < a for a, b in zip(sims, sims[1:])), sims))
    for a, k in enumerate(K_RANGE[1:]):
        ref = REFERENCE_LOSS_TABLE["no_failure"][a][0]
        checks.append(check_abs(f"sim_loss_k{k}_pct", ref, 100 * (1 - sims[k - 1] / sims[0]), 2.0))
    panel = {"xlabel": "lambda_BS [1/m^2]", "ylabel": "E[C_sum] [bit/s]", "logx": True,
             "series": series_a + series_s}
    return Result(rows, [panel], checks, "No failures: calculated (line) and simulated (markers)")


# -- failure sweeps ----------------------------------------------------------

_SWEEP_AXIS = {
    "random": ("p", (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95), FailureModel.random),
    "overload": ("beta", tuple(0.25 * i for i in range(9)), FailureModel.overload),
    "distance": ("r_max [m]", (5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0, 200.0), FailureModel.distance),
    "los": ("r_LoS [m]", (1.0, 2.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0), FailureModel.los),
}


def _failure_sweep(ctx: Context, kind: str):
    xlabel, xs, make = _SWEEP_AXIS[kind]
    models = [make(x) for x in xs]
    an_cap = np.array([[failures.analyze(ctx.params.replace(k=k), m).expected_sum_capacity
                        for m in models] for k in K_RANGE])
    an_out = np.array([[failures.analyze(ctx.params.replace(k=k), m).outage_probability
                        for m in models] for k in K_RANGE])
    sim = {}
    for realloc in (False, True):
        sim[realloc] = simulator.sweep_mean_capacity(ctx.params, ctx.region, models, K_RANGE, realloc,
                                                     ctx.replications, ctx.seed)
    rows = []
    for a, k in enumerate(K_RANGE):
        for b, x in enumerate(xs):
            rows.append({"k": k, "x": x, "analytic_capacity": an_cap[a, b], "analytic_outage": an_out[a, b],
                         "sim_capacity": sim[False][0][a, b], "sim_outage": sim[False][1][a, b],
                         "sim_capacity_realloc": sim[True][0][a, b]})

    def panel(ylabel, lines, marks, logy=False, title=None):
        series = []
        for a, k in enumerate(K_RANGE):
            if lines is not None:
                series.append({"x": xs, "y": lines[a], "label": f"k={k}", "c": a})
            series.append({"x": xs, "y": marks[a], "style": "markers", "c": a,
                           "label": None if lines is not None else f"k={k}"})
        return {"xlabel": xlabel, "ylabel": ylabel, "logy": logy, "series": series, "title": title}

    panels = [
        panel("E[C_sum] [bit/s]", an_cap, sim[False][0], title="without re-allocation"),
        panel("E[C_sum] [bit/s]", None, sim[True][0], title="with re-allocation"),
        panel("outage probability", an_out, np.maximum(sim[False][1], 1e-7), logy=True, title="outage"),
    ]
    return xs, an_cap, an_out, sim, rows, panels


def random_failure(ctx: Context) -> Result:
    xs, an_cap, an_out, sim, rows, panels = _failure_sweep(ctx, "random")
    checks = []
    n = sim[False][2]
    for p in (0.1, 0.3, 0.5):
        b = xs.index(p)
        for a, k in enumerate(K_RANGE):
            got = sim[False][1][a, b]
            lo, hi = metrics.wilson_interval(int(round(got * n)), n)
            checks.append(Check(f"outage_p{p}_k{k}_in_wilson95", p ** k, got, (hi - lo) / 2,
                                bool(lo <= p ** k <= hi)))
    hi_p = [b for b, p in enumerate(xs) if 0.7 <= p <= 0.95]
    cross = [xs[b] for b in hi_p if sim[True][0][4, b] > sim[True][0][0, b]]
    checks.append(check_true("realloc_k5_beats_k1_for_some_p_in_[0.7,0.95]", bool(cross), cross))
    return Result(rows, panels, checks, "Random failures")


def overload_failure(ctx: Context) -> Result:
    xs, an_cap, an_out, sim, rows, panels = _failure_sweep(ctx, "overload")
    checks = []
    for a, k in enumerate(K_RANGE):
        for b, beta in enumerate(xs):
            checks.append(check_abs(f"outage_beta{beta}_k{k}", an_out[a, b], sim[False][1][a, b], 0.03))
    # a failed BS takes all its links with it, so there is nothing to re-allocate
    same = np.allclose(sim[False][0], sim[True][0], rtol=1e-12, atol=0.0)
    checks.append(check_true("capacity_independent_of_reallocation", same))
    return Result(rows, panels, checks, "Overload failures")


def distance_failure(ctx: Context) -> Result:
    ctx = replace(ctx, region=replace(ctx.region, boundary=Boundary.TORUS))
    xs, an_cap, an_out, sim, rows, panels = _failure_sweep(ctx, "distance")
    checks = []
    n = sim[False][2]
    for r in (10.0, 20.0, 30.0):
        b = xs.index(r)
        q = math.exp(-ctx.params.lambda_bs * math.pi * r * r)
        sigma = math.sqrt(q * (1 - q) / n)
        got = sim[False][1][0, b]
        checks.append(Check(f"outage_rmax{r:g}_3sigma", q, got, 3 * sigma, bool(abs(got - q) <= 3 * sigma)))
    same = all(np.array_equal(sim[False][1][0], sim[False][1][a]) for a in range(len(K_RANGE)))
    checks.append(check_true("outage_independent_of_k", same))
    return Result(rows, panels, checks, "Distance failures (torus region)")


def los_failure(ctx: Context) -> Result:
    # plain-region edge users see longer links; the outage law assumes no edges
    ctx = replace(ctx, region=replace(ctx.region, boundary=Boundary.TORUS))
    xs, an_cap, an_out, sim, rows, panels = _failure_sweep(ctx, "los")
    checks = []
    n = sim[False][2]
    for b, r in enumerate(xs):
        q = an_out[0, b]
        sigma = math.sqrt(max(q * (1 - q), 1e-12) / n)
        got = sim[False][1][0, b]
        checks.append(Check(f"outage_k1_rlos{r:g}_3sigma", q, got, 3 * sigma,
                            bool(abs(got - q) <= 3 * sigma + 1e-12)))
    for a, k in enumerate(K_RANGE):
        caps = sim[False][0][a]
        checks.append(check_true(f"capacity_nondecreasing_in_rlos_k{k}",
                                 bool(np.all(np.diff(caps) >= -1e-12))))
    return Result(rows, panels, checks, "Line-of-sight failures")


# -- fairness ------------------------------------------------------------------

def fairness_cdf(ctx: Context) -> Result:
    rows, series, jain, cv = [], [], {}, {}
    for k in K_RANGE:
        cfg = simulator.SimConfig(ctx.params.replace(k=k), ctx.region, None, False,
                                  ctx.replications, ctx.seed)
        rep = simulator.run(cfg)
        jain[k] = rep.jain_index
        cv[k] = metrics.coefficient_of_variation(rep.per_user_capacity)
        x, q = rep.cdf_samples[:, 0], rep.cdf_samples[:, 1]
        series.append({"x": x, "y": q, "label": f"k={k}, J={jain[k]:.2f}", "style": "step", "c": k - 1})
        for xi, qi in zip(x, q):
            rows.append({"k": k, "capacity": xi, "quantile": qi})
    checks = [check_abs(f"jain_k{k}", REFERENCE_JAIN[k], jain[k], 0.05) for k in REFERENCE_JAIN]
    cvs = [cv[k] for k in K_RANGE]
    checks.append(check_true("cv_decreasing_in_k", all(b < a for a, b in zip(cvs, cvs[1:])), cvs))
    panel = {"xlabel": "C_sum [bit/s]", "ylabel": "CDF", "series": series}
    return Result(rows, [panel], checks, "Distribution of per-user capacity")


# -- loss table ----------------------------------------------------------------

def loss_table(ctx: Context) -> Result:
    k_cols = K_RANGE[1:]
    rows_out, checks = [], []
    # analytic no-failure row
    an = {k: _analytic_sum(ctx.params.replace(k=k)) for k in K_RANGE}
    analytic_row = {k: 1 - an[k] / an[1] for k in k_cols}

    grids = {"no_failure": [None]}
    for kind, make in (("random", FailureModel.random), ("overload", FailureModel.overload),
                       ("distance", FailureModel.distance), ("los", FailureModel.los)):
        grids[kind] = [make(x) for x in metrics.SWEEPS[kind]]
    fns, sweeps = {}, {}
    for realloc in (False, True):
        for kind, models in grids.items():
            if kind == "no_failure" and realloc:
                continue
            cap, _, _ = simulator.sweep_mean_capacity(ctx.params, ctx.region, models, K_RANGE, realloc,
                                                   ctx.replications, ctx.seed)
            name = kind + ("_realloc" if realloc else "")
            fns[name] = lambda k, s, cap=cap: cap[k - 1, s]
            sweeps[name] = range(len(models))
    table = metrics.loss_table(fns, k_cols, sweeps)

    for a, k in enumerate(k_cols):
        ref = REFERENCE_LOSS_TABLE["no_failure"][a][0]
        checks.append(check_abs(f"analytic_no_failure_loss_k{k}_pct", ref, 100 * analytic_row[k], 0.5))
    for name, cells in table.rows.items():
        tol = 2.0 if name == "no_failure" else 3.0
        for a, k in enumerate(k_cols):
            lo, hi = cells[k]
            plo, phi = REFERENCE_LOSS_TABLE[name][a]
            checks.append(check_abs(f"{name}_k{k}_min_pct", plo, 100 * lo, tol))
            if name != "no_failure":
                checks.append(check_abs(f"{name}_k{k}_max_pct", phi, 100 * hi, tol))
    for k in k_cols:
        rows_out.append({"row": "no_failure_analytic", "k": k, "min_loss": analytic_row[k],
                         "max_loss": analytic_row[k]})
    for name, cells in table.rows.items():
        for k in k_cols:
            rows_out.append({"row": name, "k": k, "min_loss": cells[k][0], "max_loss": cells[k][1]})
    series = [{"x": list(k_cols), "y": [100 * analytic_row[k] for k in k_cols], "label": "analytic"},
              {"x": list(k_cols), "y": [100 * table.rows["no_failure"][k][0] for k in k_cols],
               "label": "simulated", "style": "markers"},
              {"x": list(k_cols), "y": [r[0] for r in REFERENCE_LOSS_TABLE["no_failure"]],
               "label": "reference", "style": "markers"}]
    panel = {"xlabel": "k", "ylabel": "loss vs k=1 [%]", "series": series}
    res = Result(rows_out, [panel], checks, "Capacity loss relative to k = 1 (no failure)")
    res.table = table
    res.analytic_row = analytic_row
    return res


FIGURES = {
    "no_failure_capacity": (no_failure_capacity, 10),
    "random_failure": (random_failure, 4),
    "overload_failure": (overload_failure, 4),
    "distance_failure": (distance_failure, 4),
    "los_failure": (los_failure, 4),
    "fairness_cdf": (fairness_cdf, 10),
    "loss_table": (loss_table, 10),
}
