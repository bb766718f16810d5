"""Closed-form SNR law and expected capacities of k-nearest multi-connectivity."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import special

from . import specialfn as sf
from .specialfn import SeriesOptions, SpecialFnResult

LN2 = math.log(2.0)


@dataclass(frozen=True)
class NetworkParams:
    """Model constants.  Densities per m^2, bandwidth density in Hz per m^2."""

    lambda_bs: float = 1e-2
    lambda_u: float = 0.1
    alpha: float = 2.0
    c: float = 10 ** 3.5
    w_tot_density: float = 0.1
    k: int = 1

    def __post_init__(self):
        for name in ("lambda_bs", "lambda_u", "alpha", "c", "w_tot_density"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def phi(self) -> float:
        return self.lambda_bs * math.pi * self.c ** (2.0 / self.alpha)

    @property
    def lambda_ratio(self) -> float:
        return self.lambda_u / self.lambda_bs

    @property
    def w_bs(self) -> float:
        """Bandwidth owned by one BS (Hz)."""
        return self.w_tot_density / self.lambda_bs

    @property
    def bandwidth_factor(self) -> float:
        """Expected per-link bandwidth W_tot / (k lambda_u), in Hz."""
        return self.w_tot_density / (self.k * self.lambda_u)

    def replace(self, **changes) -> "NetworkParams":
        return replace(self, **changes)


class Method(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


@dataclass(frozen=True)
class CapacityMoments:
    per_link: tuple
    sum: float
    method: Method


class ApproxLogSnr(NamedTuple):
    value: float
    valid: bool


class DecreasingWitness(NamedTuple):
    decreasing: bool
    guaranteed: bool
    capacities: tuple


# -- distributions ----------------------------------------------------------

def distance_tail(j: int, r, p: NetworkParams):
    """P(R_j > r) = Gamma(j, lambda_bs pi r^2) / Gamma(j)."""
    r = np.asarray(r, dtype=float)
    out = special.gammaincc(j, p.lambda_bs * math.pi * r * r)
    return float(out) if out.ndim == 0 else out


def distance_pdf(j: int, r, p: NetworkParams):
    r = np.asarray(r, dtype=float)
    u = p.lambda_bs * math.pi * r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, 2.0 * np.exp(j * np.log(u) - u - math.lgamma(j)) / r, 0.0)
    return float(out) if out.ndim == 0 else out


def snr_point_mass(j: int, p: NetworkParams) -> float:
    """P(SNR_j = c) = P(R_j < 1)."""
    return 1.0 - sf.regularized_upper_gamma(j, p.lambda_bs * math.pi)


def snr_pdf(j: int, x, p: NetworkParams):
    """Density of SNR_j on (0, c); the atom at c is :func:`snr_point_mass`."""
    if j < 1:
        raise ValueError("rank j must be >= 1")
    x = np.asarray(x, dtype=float)
    a = p.alpha
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        y = p.phi * x ** (-2.0 / a)
        dens = 2.0 * np.exp(j * np.log(y) - y - math.lgamma(j)) / (a * x)
    out = np.where((x > 0) & (x < p.c) & np.isfinite(dens), dens, 0.0)
    return float(out) if out.ndim == 0 else out


def snr_cdf(j: int, x, p: NetworkParams):
    """P(SNR_j <= x), including the atom at c."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        y = p.phi * np.where(x > 0, x, np.nan) ** (-2.0 / p.alpha)
    out = np.where(x >= p.c, 1.0, np.where(x > 0, special.gammaincc(j, np.nan_to_num(y)), 0.0))
    return float(out) if out.ndim == 0 else out


# -- expected log2(1 + SNR_j) -----------------------------------------------

def expected_log_snr_exact(j: int, p: NetworkParams,
                           opts: SeriesOptions = sf.DEFAULT_OPTIONS) -> SpecialFnResult:
    """E[log2(1 + SNR_j)] from the incomplete-gamma series representation."""
    if j < 1:
        raise ValueError("rank j must be >= 1")
    return _expected_log_snr_exact(int(j), p.lambda_bs, p.alpha, p.c, opts)


@lru_cache(maxsize=4096)
def _expected_log_snr_exact(j, lambda_bs, alpha, c, opts):
    phi = lambda_bs * math.pi * c ** (2.0 / alpha)
    x_low = lambda_bs * math.pi
    gj = sf.gamma(j)

    g = sf.g_series(j, phi, alpha, lambda_bs, opts)
    # Gamma(j, x_low) - Gamma(j, phi) and the matching derivative difference
    # are taken through the lower functions: both upper values sit near
    # Gamma(j) when phi is small and their difference would cancel.
    sign, ldiff = sf._log_diff_exp(sf.log_lower_regularized(j, phi),
                                   sf.log_lower_regularized(j, x_low))
    mass = sign * gj * math.exp(ldiff) if sign else 0.0
    d_far = sf.lower_incomplete_gamma_dorder(j, phi, opts)
    d_near = sf.lower_incomplete_gamma_dorder(j, x_low, opts)

    atom = math.log2(1.0 + c) * (1.0 - sf.regularized_upper_gamma(j, x_low))
    log_part = (alpha / (2.0 * LN2 * gj)) * (
        math.log(phi) * mass - (d_far.value - d_near.value))
    value = g.value / (LN2 * gj) + atom + log_part
    error = (g.error_bound / (LN2 * gj)
             + alpha / (2.0 * LN2 * gj) * (d_near.error_bound + d_far.error_bound)
             + 16 * sf._EPS * (abs(atom) + abs(log_part) + abs(g.value) / gj))
    return SpecialFnResult(value, error, g.terms_used + d_near.terms_used + d_far.terms_used)


def expected_log_snr_approx(j: int, p: NetworkParams) -> ApproxLogSnr:
    """High-SNR closed form; ``valid`` flags lambda_bs pi < 1, phi > 1, c > 1."""
    if j < 1:
        raise ValueError("rank j must be >= 1")
    x_low = p.lambda_bs * math.pi
    shift = x_low if j == 1 else sf.harmonic(j - 1)
    value = p.alpha / (2.0 * LN2) * (math.log(p.phi) + sf.EULER_GAMMA - shift)
    valid = x_low < 1.0 and p.phi > 1.0 and p.c > 1.0
    return ApproxLogSnr(value, valid)


def expected_log_snr(j: int, p: NetworkParams, method: Method = Method.EXACT) -> float:
    if Method(method) is Method.EXACT:
        return expected_log_snr_exact(j, p).value
    return expected_log_snr_approx(j, p).value


# -- capacities -------------------------------------------------------------

def expected_capacity_per_link(j: int, p: NetworkParams, method: Method = Method.EXACT) -> float:
    """E[C_j] in bit/s."""
    if not 1 <= j <= p.k:
        raise ValueError(f"rank j={j} outside 1..k={p.k}")
    return p.bandwidth_factor * expected_log_snr(j, p, method)


def expected_sum_capacity(p: NetworkParams, method: Method = Method.EXACT) -> CapacityMoments:
    method = Method(method)
    per_link = tuple(expected_capacity_per_link(j, p, method) for j in range(1, p.k + 1))
    if method is Method.APPROX:
        k = p.k
        total = (p.w_tot_density / p.lambda_u * p.alpha / (2.0 * LN2)
                 * (math.log(p.phi) + sf.EULER_GAMMA + 1.0
                    - (sf.harmonic(k) + p.lambda_bs * math.pi / k)))
    else:
        total = math.fsum(per_link)
    return CapacityMoments(per_link, total, method)


def sum_capacity_is_decreasing(p: NetworkParams, k_max: int) -> DecreasingWitness:
    """Whether the high-SNR E[C_sum^k] strictly decreases over k = 1..k_max."""
    caps = tuple(expected_sum_capacity(p.replace(k=k), Method.APPROX).sum
                 for k in range(1, k_max + 1))
    decreasing = all(b < a for a, b in zip(caps, caps[1:]))
    return DecreasingWitness(decreasing, p.lambda_bs * math.pi < 1.0, caps)
