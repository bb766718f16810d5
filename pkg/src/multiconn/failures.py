"""Expected sum capacity and outage under link failures, without re-allocation.

Per-link expectations are integrals against the law of R_j.  They are
evaluated in u = lambda_bs pi r^2, where R_j becomes Gamma(j, 1) and the
density is smooth, so plain adaptive quadrature converges quickly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import analytic, degree
from .analytic import NetworkParams

# past this many units of u the Gamma(j, 1) tail is far below double eps
_U_TAIL = 80.0
QUAD_TOL = 1e-11


class QuadratureError(ArithmeticError):
    def __init__(self, msg, partial_value, error_estimate):
        super().__init__(f"{msg} (partial value {partial_value!r}, error estimate {error_estimate:.3g})")
        self.partial_value = partial_value
        self.error_estimate = error_estimate


class FailureKind(str, enum.Enum):
    RANDOM = "random"
    OVERLOAD = "overload"
    DISTANCE = "distance"
    LOS = "los"


@dataclass(frozen=True)
class FailureModel:
    """One of the four failure models; ``value`` is p, beta, r_max or r_los."""

    kind: FailureKind
    value: float
    blockage_constant: float = 18.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FailureKind(self.kind))
        v = self.value
        if not math.isfinite(v):
            raise ValueError(f"{self.kind.value} parameter must be finite")
        if self.kind is FailureKind.RANDOM and not 0.0 <= v <= 1.0:
            raise ValueError(f"random failure probability must be in [0, 1], got {v}")
        if self.kind is FailureKind.OVERLOAD and v < 0:
            raise ValueError(f"beta must be >= 0, got {v}")
        if self.kind in (FailureKind.DISTANCE, FailureKind.LOS) and not v > 0:
            raise ValueError(f"{self.kind.value} radius must be positive, got {v}")

    @classmethod
    def random(cls, p):
        return cls(FailureKind.RANDOM, float(p))

    @classmethod
    def overload(cls, beta):
        return cls(FailureKind.OVERLOAD, float(beta))

    @classmethod
    def distance(cls, r_max):
        return cls(FailureKind.DISTANCE, float(r_max))

    @classmethod
    def los(cls, r_los, blockage_constant=18.0):
        return cls(FailureKind.LOS, float(r_los), float(blockage_constant))


@dataclass(frozen=True)
class FailureAnalysis:
    expected_sum_capacity: float  # bit/s
    outage_probability: float
    per_link_fail_prob: tuple


# -- per-link integrals ----------------------------------------------------

def _gamma_density(j, u):
    return np.exp((j - 1) * np.log(u) - u - math.lgamma(j))


def _log_snr_of_u(u, p: NetworkParams):
    # r = sqrt(u / (lambda pi)), log2(1 + c r^-alpha); r >= 1 on every call site
    return np.log1p(p.c * (u / (p.lambda_bs * math.pi)) ** (-p.alpha / 2.0)) / analytic.LN2


def _quad_u(fn, lo, hi, breaks=()):
    """integral of fn over [lo, hi] in u, split at the given interior points."""
    if hi <= lo:
        return 0.0
    pts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    total = 0.0
    err = 0.0
    for a, b in zip(pts, pts[1:]):
        val, e = integrate.quad(fn, a, b, epsabs=0.0, epsrel=QUAD_TOL, limit=200)
        total += val
        err += e
    if not err <= max(1e-9 * abs(total), 1e-13):
        raise QuadratureError("quadrature did not converge", total, err)
    return total


def _u_breaks(j):
    # mode of Gamma(j,1) and a couple of widths either side
    m = max(j - 1.0, 0.0)
    s = math.sqrt(j)
    return (m, m + 3 * s, m + 8 * s)


def _r_to_u(r, p):
    return p.lambda_bs * math.pi * r * r


def _far_log_snr(j, p, r_lo, r_hi, weight=None):
    """E[log2(1 + c R^-alpha) w(R); r_lo < R_j <= r_hi] for r_lo >= 1."""
    u_lo = _r_to_u(r_lo, p)
    u_hi = min(_r_to_u(r_hi, p), u_lo + j + _U_TAIL)
    if weight is None:
        fn = lambda u: _log_snr_of_u(u, p) * _gamma_density(j, u)
    else:
        scale = 1.0 / (p.lambda_bs * math.pi)
        fn = lambda u: _log_snr_of_u(u, p) * weight(math.sqrt(u * scale)) * _gamma_density(j, u)
    return _quad_u(fn, u_lo, u_hi, _u_breaks(j))


def _near_mass(j, p, r):
    """P(R_j < r)."""
    return float(special.gammainc(j, _r_to_u(r, p)))


# -- analyses --------------------------------------------------------------

def _exact_sum(p: NetworkParams):
    return math.fsum(analytic.expected_log_snr_exact(j, p).value for j in range(1, p.k + 1))


def analyze_random(p: NetworkParams, fp: float) -> FailureAnalysis:
    FailureModel.random(fp)
    cap = p.bandwidth_factor * (1.0 - fp) * _exact_sum(p)
    return FailureAnalysis(cap, fp ** p.k, (fp,) * p.k)


def analyze_overload(p: NetworkParams, beta: float) -> FailureAnalysis:
    """BSs fail w.p. 1 - d^-beta.  The link bandwidth W_BS/D and the survival
    D^-beta share the size-biased degree D of the serving BS."""
    FailureModel.overload(beta)
    m = degree.DegreeModel.from_params(p)
    inv = degree.size_biased_inverse_moment(m, beta)  # (1/k lam) sum n^-beta pmf(n)
    survive = degree.size_biased_survival(m, beta)
    # W_BS * E[D*^(-1-beta)] = W_tot/(k lambda_u) * sum_n n^-beta pmf(n)
    cap = p.w_bs * inv * _exact_sum(p)
    fail = min(max(1.0 - survive, 0.0), 1.0)
    return FailureAnalysis(cap, fail ** p.k, (fail,) * p.k)


def analyze_distance(p: NetworkParams, r_max: float) -> FailureAnalysis:
    FailureModel.distance(r_max)
    c_near = math.log2(1.0 + p.c)
    total = 0.0
    fails = []
    for j in range(1, p.k + 1):
        e = c_near * _near_mass(j, p, min(1.0, r_max))
        if r_max > 1.0:
            e += _far_log_snr(j, p, 1.0, r_max)
        total += e
        fails.append(float(special.gammaincc(j, _r_to_u(r_max, p))))
    outage = math.exp(-_r_to_u(r_max, p))
    return FailureAnalysis(p.bandwidth_factor * total, outage, tuple(fails))


def los_blockage_prob(r, r_los: float, blockage_constant: float = 18.0):
    """Probability that a link of length r is blocked; 0 up to r_los."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.exp(-r / (2.0 * r_los))
        g = 1.0 - (r_los + r * e - blockage_constant * e) / r
    out = np.where(r <= r_los, 0.0, np.clip(g, 0.0, 1.0))
    return float(out) if out.ndim == 0 else out


def analyze_los(p: NetworkParams, r_los: float, blockage_constant: float = 18.0) -> FailureAnalysis:
    FailureModel.los(r_los, blockage_constant)
    c_near = math.log2(1.0 + p.c)
    alive = lambda r: 1.0 - los_blockage_prob(r, r_los, blockage_constant)
    scale = 1.0 / (p.lambda_bs * math.pi)
    total = 0.0
    fails = []
    for j in range(1, p.k + 1):
        if r_los >= 1.0:
            e = c_near * _near_mass(j, p, 1.0) + _far_log_snr(j, p, 1.0, r_los)
            e += _far_log_snr(j, p, r_los, math.inf, alive)
        else:
            # SNR is clamped at c below 1 m; blockage already starts at r_los
            u1 = _r_to_u(1.0, p)
            e = c_near * (_near_mass(j, p, r_los) + _quad_u(
                lambda u: alive(math.sqrt(u * scale)) * _gamma_density(j, u),
                _r_to_u(r_los, p), u1))
            e += _far_log_snr(j, p, 1.0, math.inf, alive)
        total += e
        u_lo = _r_to_u(r_los, p)
        pj = _quad_u(lambda u: los_blockage_prob(math.sqrt(u * scale), r_los, blockage_constant)
                     * _gamma_density(j, u), u_lo, u_lo + j + _U_TAIL, _u_breaks(j))
        fails.append(min(max(pj, 0.0), 1.0))
    return FailureAnalysis(p.bandwidth_factor * total, math.prod(fails), tuple(fails))


def analyze(p: NetworkParams, model: FailureModel) -> FailureAnalysis:
    if model.kind is FailureKind.RANDOM:
        return analyze_random(p, model.value)
    if model.kind is FailureKind.OVERLOAD:
        return analyze_overload(p, model.value)
    if model.kind is FailureKind.DISTANCE:
        return analyze_distance(p, model.value)
    return analyze_los(p, model.value, model.blockage_constant)
