"""Real-parameter gamma-family functions with controlled truncation error.

Everything here is scalar and pure.  Series that are summed to a tolerance
return a :class:`SpecialFnResult` carrying an upper bound on the
truncation plus rounding error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, special

EULER_GAMMA = 0.57721566490153286061
_EPS = 2.220446049250313e-16
_FPMIN = 1e-300
_MAX_ITER = 100_000
_CVZ_BASE = 3.0 + math.sqrt(8.0)


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class TruncationError(ArithmeticError):
    """A series did not reach its tolerance within ``max_terms``."""

    def __init__(self, message, partial_value, terms_used):
        super().__init__(message)
        self.partial_value = partial_value
        self.terms_used = terms_used


@dataclass(frozen=True)
class SeriesOptions:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")

    def tol(self, scale: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(scale))

    def tightened(self, factor: float = 10.0) -> "SeriesOptions":
        return SeriesOptions(self.abs_tol / factor, self.rel_tol / factor, self.max_terms)


@dataclass(frozen=True)
class SpecialFnResult:
    value: float
    error_bound: float
    terms_used: int

    def __float__(self):
        return float(self.value)


DEFAULT_OPTIONS = SeriesOptions()


def _is_int(s: float) -> bool:
    return abs(s - round(s)) < 1e-12


def gamma(s: float) -> float:
    """Complete gamma function for real ``s > 0``; exact factorials at integers."""
    if not s > 0:
        raise DomainError(f"gamma requires s > 0, got {s!r}")
    if _is_int(s) and s <= 171:
        return float(math.factorial(int(round(s)) - 1))
    return math.gamma(s)


def harmonic(n: int) -> float:
    if n < 0:
        raise DomainError(f"harmonic number needs n >= 0, got {n}")
    return math.fsum(1.0 / i for i in range(1, int(n) + 1))


def digamma(s: float) -> float:
    if _is_int(s) and s >= 1:
        return -EULER_GAMMA + harmonic(int(round(s)) - 1)
    return float(special.psi(s))


# -- regularized incomplete gamma building blocks ---------------------------

def _series_log_p(s, x):
    """log P(s, x) from the power series; good for x < s + 1, s > 0."""
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return math.log(total) - x + s * math.log(x) - math.lgamma(s)


def _cf_log_scaled(s, x):
    """log of h where Gamma(s, x) = exp(-x) x^s h (Legendre continued fraction).

    Converges for every real ``s`` and ``x > 0``; fast once x is not small.
    """
    b = x + 1.0 - s
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.log(h)


def _e1_small(x):
    """Exponential integral E1(x) = Gamma(0, x) for 0 < x < 1."""
    total = 0.0
    term = 1.0
    for n in range(1, _MAX_ITER):
        term *= -x / n
        inc = term / n
        total += inc
        if abs(inc) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _log_upper_negative_small_x(s, x):
    """log Gamma(s, x) for s <= 0, 0 < x < 1 via downward recurrence.

    Works on U(t) = x^-t e^x Gamma(t, x), for which the recurrence
    U(t) = (x U(t+1) - 1) / t stays in range and loses no accuracy for x < 1.
    """
    if _is_int(s):
        top = 0
        u = math.exp(x) * _e1_small(x)
    else:
        top = s + math.floor(-s) + 1.0  # in (0, 1]
        g = _upper_small_order(top, x) if top < 1.0 else math.exp(-x)
        u = math.exp(x - top * math.log(x)) * g
    t = top - 1.0
    while t >= s - 1e-9:
        u = (x * u - 1.0) / t
        t -= 1.0
    return math.log(u) + s * math.log(x) - x


def _gamma1pm1_over_s(s):
    """(Gamma(1+s) - 1) / s for 0 < s < 1 without cancellation near s = 0."""
    if s > 0.25:
        return math.expm1(math.lgamma(1.0 + s)) / s
    # lgamma(1+s) = -gamma s + sum_{k>=2} (-1)^k zeta(k) s^k / k
    acc = -EULER_GAMMA
    sk = -1.0
    for k in range(2, 80):
        sk *= -s
        inc = _ZETA[k] * sk / k
        acc += inc
        if abs(inc) < _EPS * abs(acc):
            break
    lg = s * acc
    return math.expm1(lg) / s


_ZETA = [0.0, 0.0] + [float(special.zeta(k)) for k in range(2, 80)]


def _upper_small_order(s, x):
    """Gamma(s, x) for 0 < s < 1, 0 < x < 1.5, free of the Gamma(s) - gamma(s, x) cancellation."""
    lx = math.log(x)
    head = _gamma1pm1_over_s(s) - math.expm1(s * lx) / s
    total = 0.0
    term = 1.0
    for n in range(1, _MAX_ITER):
        term *= -x / n
        inc = term / (s + n)
        total += inc
        if abs(inc) < _EPS * abs(total):
            break
    return head - math.exp(s * lx) * total


def log_upper_incomplete_gamma(s: float, x: float) -> float:
    """Natural log of Gamma(s, x); ``s`` any real when ``x > 0``."""
    if x < 0:
        raise DomainError(f"upper incomplete gamma needs x >= 0, got {x!r}")
    if x == 0:
        if s <= 0:
            raise DomainError(f"Gamma(s, 0) diverges for s = {s!r} <= 0")
        return math.lgamma(s)
    if 0 < s < 1.0 and x < 1.5:
        return math.log(_upper_small_order(s, x))
    if s > 0 and x < s + 1.0:
        return math.lgamma(s) + math.log1p(-math.exp(_series_log_p(s, x)))
    if x >= 1.0:
        return -x + s * math.log(x) + _cf_log_scaled(s, x)
    return _log_upper_negative_small_x(s, x)


def log_lower_regularized(s: float, x: float) -> float:
    """log P(s, x) = log(gamma_lower(s, x) / Gamma(s)) for s > 0."""
    if not s > 0:
        raise DomainError("regularized lower gamma needs s > 0")
    if x <= 0:
        return -math.inf
    if x < s + 1.0:
        return _series_log_p(s, x)
    q = math.exp(-x + s * math.log(x) - math.lgamma(s) + _cf_log_scaled(s, x))
    return math.log1p(-q)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Gamma(s, x) = int_x^inf t^(s-1) e^-t dt.

    Negative and non-integer orders are allowed for x > 0.
    """
    return math.exp(log_upper_incomplete_gamma(s, x))


def regularized_upper_gamma(s: float, x: float) -> float:
    """Q(s, x) = Gamma(s, x) / Gamma(s) for s > 0."""
    if not s > 0:
        raise DomainError("regularized upper gamma needs s > 0")
    if x <= 0:
        return 1.0
    if s < 1.0 and x < 1.5:
        return _upper_small_order(s, x) / math.gamma(s)
    if x < s + 1.0:
        return -math.expm1(_series_log_p(s, x))
    return math.exp(-x + s * math.log(x) - math.lgamma(s) + _cf_log_scaled(s, x))


# -- order derivative -------------------------------------------------------

def upper_incomplete_gamma_dorder(s: float, x: float,
                                  opts: SeriesOptions = DEFAULT_OPTIONS) -> SpecialFnResult:
    """d/da Gamma(a, x) at a = s.

    Uses ln(x) Gamma(s,x) - Gamma(s)(ln x - psi(s)) + sum_i (-1)^i x^(s+i) / (i! (s+i)^2),
    with psi(n) = H_(n-1) - gamma at integers.  When the alternating sum loses
    too many digits to cancellation (large x) the defining integral
    int_x^inf ln(t) t^(s-1) e^-t dt is integrated instead.
    """
    _check_dorder_args(s, x)
    head = gamma(s) * digamma(s)
    try:
        total, trunc, rounding, n = _dlower_series(s, x, opts.max_terms)
    except _Cancellation:
        return _dorder_quadrature(s, x, opts)
    value = head - total
    bound = trunc + rounding + 4.0 * _EPS * abs(head)
    if bound > opts.tol(value):
        return _dorder_quadrature(s, x, opts)
    return SpecialFnResult(value, bound, n)


def lower_incomplete_gamma_dorder(s: float, x: float,
                                  opts: SeriesOptions = DEFAULT_OPTIONS) -> SpecialFnResult:
    """d/da gamma_lower(a, x) at a = s, i.e. int_0^x ln(t) t^(s-1) e^-t dt.

    Differences of upper-gamma derivatives at two small arguments cancel
    badly; this form does not.
    """
    _check_dorder_args(s, x)
    try:
        total, trunc, rounding, n = _dlower_series(s, x, opts.max_terms)
        bound = trunc + rounding
        if bound <= opts.tol(total):
            return SpecialFnResult(total, bound, n)
    except _Cancellation:
        pass
    head = gamma(s) * digamma(s)
    upper = _dorder_quadrature(s, x, opts)
    return SpecialFnResult(head - upper.value,
                           upper.error_bound + 4.0 * _EPS * abs(head), upper.terms_used)


def _check_dorder_args(s, x):
    if not s > 0 or not x > 0:
        raise DomainError(f"dorder needs s > 0 and x > 0, got s={s!r}, x={x!r}")


class _Cancellation(Exception):
    pass


def _dlower_series(s, x, max_terms):
    """sum_i (-1)^i x^(s+i)/i! (ln x/(s+i) - 1/(s+i)^2), summed to machine precision.

    Returns (total, truncation bound, rounding bound, terms).  The terms
    alternate and shrink once i > x, so the first neglected term bounds the tail.
    """
    if x > 50.0:
        raise _Cancellation
    lx = math.log(x)
    power = math.exp(s * lx)  # x^(s+i) / i!
    total = 0.0
    abs_total = 0.0
    i = 0
    while True:
        if i >= max_terms:
            raise TruncationError("order-derivative series did not converge", total, i)
        term = power * (lx / (s + i) - 1.0 / (s + i) ** 2)
        if i % 2:
            term = -term
        total += term
        abs_total += abs(term)
        if not math.isfinite(abs_total):
            raise _Cancellation
        i += 1
        power *= x / i
        nxt = power * abs(lx / (s + i) - 1.0 / (s + i) ** 2)
        if i > x + 1.0 and nxt < abs(term) and nxt <= _EPS * abs(total):
            return total, nxt, 8.0 * _EPS * abs_total, i


def _dorder_quadrature(s, x, opts):
    lx = math.log(x)
    # Gamma_s'(s, x) = x^(s-1) e^-x int_0^inf ln(x+u) (1+u/x)^(s-1) e^-u du
    def integrand(u):
        return (lx + math.log1p(u / x)) * math.exp((s - 1.0) * math.log1p(u / x) - u)

    val, err = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0,
                              epsrel=min(opts.rel_tol, 1e-12), limit=400)
    scale = math.exp((s - 1.0) * lx - x)
    value = scale * val
    bound = scale * err + 8.0 * _EPS * abs(value)
    return SpecialFnResult(value, bound, 0)


# -- G(j, phi) --------------------------------------------------------------

def cvz_alternating_sum(term, tol: float, max_terms: int):
    """Sum_{i>=0} (-1)^i a_i for a completely monotone (moment) sequence a_i.

    Cohen-Villegas-Zagier acceleration: with n terms the error is at most
    a_0 / d_n, d_n ~ (3 + sqrt 8)^n / 2.  Returns (value, error_bound, n).
    """
    a0 = term(0)
    if a0 == 0.0:
        return 0.0, 0.0, 1
    n = 1
    while a0 / _cvz_d(n) > tol:
        n += 1
        if n > max_terms:
            raise TruncationError("alternating series needs more than max_terms terms",
                                  a0, max_terms)
    d = _cvz_d(n)
    b = -1.0
    c = -d
    acc = 0.0
    weight = 0.0
    for k in range(n):
        c = b - c
        ak = a0 if k == 0 else term(k)
        acc += c * ak
        weight += abs(c) * ak
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    value = acc / d
    bound = a0 / d + 64.0 * _EPS * weight / d
    return value, bound, n


def _cvz_d(n):
    d = _CVZ_BASE ** n
    return 0.5 * (d + 1.0 / d)


def _log_diff_exp(la, lb):
    """log(exp(la) - exp(lb)) with sign; returns (sign, log|diff|)."""
    if la == lb:
        return 0, -math.inf
    if la > lb:
        return 1, la + math.log1p(-math.exp(lb - la))
    return -1, lb + math.log1p(-math.exp(la - lb))


def g_series(j: int, phi: float, alpha: float, lambda_bs: float,
             opts: SeriesOptions = DEFAULT_OPTIONS) -> SpecialFnResult:
    """The alternating incomplete-gamma series G(j, phi).

    G = sum_i (-1)^i/(i+1) [ phi^(m_i) Gamma(j - m_i, phi)
                             + phi^(-m_i) (Gamma(m_i + j, lambda_bs*pi) - Gamma(m_i + j, phi)) ]
    with m_i = (alpha/2)(i+1).  Both sub-sequences are moments of positive
    measures on [0, 1], so each is summed with CVZ acceleration.
    """
    if j < 1 or not phi > 0 or not alpha > 0 or not lambda_bs > 0:
        raise DomainError("g_series needs j >= 1 and positive phi, alpha, lambda_bs")
    half = 0.5 * alpha
    lphi = math.log(phi)
    x_low = lambda_bs * math.pi

    def near_term(i):
        m = half * (i + 1)
        return math.exp(m * lphi + log_upper_incomplete_gamma(j - m, phi)) / (i + 1)

    def far_term(i):
        m = half * (i + 1)
        s = m + j
        sign, ldiff = _log_diff_exp(log_lower_regularized(s, phi),
                                    log_lower_regularized(s, x_low))
        if sign == 0:
            return 0.0
        return sign * math.exp(-m * lphi + math.lgamma(s) + ldiff) / (i + 1)

    # rough scale of the result to turn rel_tol into an absolute target
    scale = abs(near_term(0)) + abs(far_term(0))
    tol = 0.5 * opts.tol(0.5 * scale)
    near, near_err, n1 = cvz_alternating_sum(near_term, tol, opts.max_terms)
    if phi >= x_low:
        far, far_err, n2 = cvz_alternating_sum(far_term, tol, opts.max_terms)
    else:
        neg, far_err, n2 = cvz_alternating_sum(lambda i: -far_term(i), tol, opts.max_terms)
        far = -neg
    value = near + far
    return SpecialFnResult(value, near_err + far_err, n1 + n2)
