"""Negative-binomial approximation of the BS degree law under k-connectivity.

P(D = n) = Gamma(n + a_k) / (Gamma(n + 1) Gamma(a_k)) * a_k^a_k (k lam)^n / (k lam + a_k)^(a_k + n)

with lam = lambda_u / lambda_bs and the fitted shape a_k below.  The mean
is exactly k * lam.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

SHAPE_CONSTANTS = {1: 3.5, 2: 7.2, 3: 11.1, 4: 15.2, 5: 21.2}
TAIL_TOL = 1e-12
# moments weight the tail by up to n, so sums run further out
_MOMENT_TAIL_TOL = 1e-20


@dataclass(frozen=True)
class DegreeModel:
    k: int
    lambda_ratio: float

    def __post_init__(self):
        if self.k not in SHAPE_CONSTANTS:
            raise ValueError(f"degree model only fitted for k in 1..5, got {self.k}")
        if not self.lambda_ratio > 0:
            raise ValueError("lambda_ratio must be positive")

    @classmethod
    def from_params(cls, params) -> "DegreeModel":
        return cls(params.k, params.lambda_ratio)

    @property
    def a_k(self) -> float:
        return SHAPE_CONSTANTS[self.k]

    @property
    def mean(self) -> float:
        return self.k * self.lambda_ratio


def log_pmf(m: DegreeModel, n):
    n = np.asarray(n, dtype=float)
    a = m.a_k
    kl = m.mean
    return (gammaln(n + a) - gammaln(n + 1.0) - math.lgamma(a)
            + a * math.log(a) + n * math.log(kl) - (a + n) * math.log(kl + a))


def degree_pmf(m: DegreeModel, n):
    """P(D_BS = n); vectorised over ``n``."""
    out = np.exp(log_pmf(m, n))
    return float(out) if out.ndim == 0 else out


def support_limit(m: DegreeModel, tail_tol: float = TAIL_TOL) -> int:
    """Smallest N with P(D > N) < tail_tol, from the geometric ratio bound.

    pmf(n+1)/pmf(n) = (n + a)/(n + 1) * q with q = k lam / (k lam + a); the ratio
    is non-increasing in n for a >= 1, so once it is below one the tail past
    N is at most pmf(N) r / (1 - r).
    """
    a = m.a_k
    q = m.mean / (m.mean + a)
    n = int(m.mean)
    while True:
        r = (n + a) / (n + 1.0) * q
        if r < 1.0:
            pn = degree_pmf(m, n)
            if pn * r / (1.0 - r) < tail_tol:
                return n
        n = max(n + 1, int(n * 1.25))


def _weighted_sum(m: DegreeModel, weight, start: int = 0) -> float:
    n_max = support_limit(m, _MOMENT_TAIL_TOL)
    n = np.arange(start, n_max + 1, dtype=float)
    return math.fsum(degree_pmf(m, n) * weight(n))


def size_biased_inverse_moment(m: DegreeModel, beta: float) -> float:
    """E[(D*)^(-beta-1)] = (1 / (k lam)) sum_{n>=1} n^(-beta) P(D = n).

    D* is the size-biased degree, i.e. the degree of the BS behind a random link.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return _weighted_sum(m, lambda n: n ** -beta, start=1) / m.mean


def size_biased_survival(m: DegreeModel, beta: float) -> float:
    """E[(D*)^(-beta)]: probability that a random link survives overload failures."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return _weighted_sum(m, lambda n: n ** (1.0 - beta), start=1) / m.mean


def empty_probability(m: DegreeModel) -> float:
    return float(degree_pmf(m, 0))

