"""CDFs, intervals, distribution distances and relative-loss tables."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

# sweep grids used for the capacity-loss table; the ranges are our choice
SWEEPS = {
    "random": tuple(round(0.1 * i, 1) for i in range(10)),
    "overload": tuple(0.25 * i for i in range(9)),
    "distance": (10.0, 20.0, 30.0, 40.0, 50.0, 75.0, 100.0, 150.0, 200.0),
    "los": (1.0, 2.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0),
}


def empirical_cdf(samples):
    """Right-continuous step CDF: (distinct sorted values, P(X <= value))."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    # last occurrence of each distinct value carries the jump
    last = np.r_[x[1:] != x[:-1], True]
    return x[last], (np.nonzero(last)[0] + 1) / x.size


def wilson_interval(successes: int, n: int, confidence: float = 0.95):
    if n <= 0:
        raise ValueError("n must be positive")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    ph = successes / n
    denom = 1.0 + z * z / n
    centre = (ph + z * z / (2 * n)) / denom
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def ks_statistic(samples, cdf) -> float:
    """sup |F_n - F| against a vectorised CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = cdf(x)
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


def ks_critical(n: int, level: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value."""
    return stats.kstwobign.isf(level) / math.sqrt(n)


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = max(p.size, q.size)
    p = np.pad(p, (0, m - p.size))
    q = np.pad(q, (0, m - q.size))
    return 0.5 * float(np.abs(p - q).sum())


def coefficient_of_variation(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.std(x) / np.mean(x))


@dataclass
class LossTable:
    """cells[row][k] = (min_loss, max_loss) with loss = 1 - C(k)/C(1)."""

    rows: dict
    k_range: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["row", "k", "min_loss", "max_loss"])
        for name, cells in self.rows.items():
            for k in self.k_range:
                lo, hi = cells[k]
                w.writerow([name, k, f"{lo:.6f}", f"{hi:.6f}"])
        return buf.getvalue()

    def to_text(self) -> str:
        head = ["row"] + [f"k={k}" for k in self.k_range]
        body = []
        for name, cells in self.rows.items():
            line = [name]
            for k in self.k_range:
                lo, hi = cells[k]
                line.append(f"{100 * lo:.1f}%" if abs(hi - lo) < 5e-4 else f"{100 * lo:.1f} / {100 * hi:.1f}%")
            body.append(line)
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
        return "\n".join([fmt(head)] + [fmt(r) for r in body]) + "\n"


def loss_row(capacity_fn, k_range, sweep):
    """min/max over the sweep of 1 - C(k, s)/C(1, s) for each k in k_range."""
    base = {}
    for s in sweep:
        c1 = capacity_fn(1, s)
        if not c1 > 0:
            raise ValueError(f"capacity at k=1 must be positive, got {c1} at sweep point {s!r}")
        base[s] = c1
    cells = {}
    for k in k_range:
        losses = [1.0 - capacity_fn(k, s) / base[s] for s in sweep]
        cells[k] = (min(losses), max(losses))
    return cells


def loss_table(capacity_fns: dict, k_range=(2, 3, 4, 5), sweeps=None) -> LossTable:
    """``capacity_fns`` maps a row name to f(k, sweep_point); ``sweeps`` maps row to points."""
    sweeps = sweeps or {}
    rows = {name: loss_row(fn, k_range, sweeps.get(name, (None,))) for name, fn in capacity_fns.items()}
    return LossTable(rows, tuple(k_range))
