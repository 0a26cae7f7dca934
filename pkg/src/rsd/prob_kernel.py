"""Log-space special functions: gamma, beta, incomplete beta, beta-binomial.

Everything here is evaluated in log space so that shape parameters of order
1e5 (the sample counts N + N_o met in practice) neither overflow nor lose
the small tails the scenario bounds are made of.
"""
from __future__ import annotations

import math

from .errors import ConvergenceError, DomainError

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING_MIN = 10.0
_CF_EPS = 1e-16
_CF_TINY = 1e-300

# Coefficients of the asymptotic series of ln Gamma(z) - Stirling(z),
# in powers z^-1, z^-3, ..., z^-13.
_STIRLING_SERIES = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def check_probability(name: str, value: float) -> float:
    """Return ``value`` as float, raising DomainError unless it is in [0, 1]."""
    value = float(value)
    if not 0.0 <= value <= 1.0:  # also rejects NaN
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite real, got {value!r}")
    return value


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    x = _check_positive("x", x)
    return math.lgamma(x)


def _stirling_delta(z: float) -> float:
    # ln Gamma(z) minus its Stirling main part (z - 1/2) ln z - z + ln sqrt(2 pi)
    if z >= _STIRLING_MIN:
        inv = 1.0 / z
        inv2 = inv * inv
        acc = 0.0
        for coef in reversed(_STIRLING_SERIES):
            acc = acc * inv2 + coef
        return acc * inv
    return math.lgamma(z) - ((z - 0.5) * math.log(z) - z + _LN_SQRT_2PI)


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).

    For large arguments the Stirling main parts are combined analytically
    first, which avoids cancelling three numbers of size a ln a.
    """
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    return _log_beta(a, b)


def _log_beta(a: float, b: float) -> float:
    small, large = (a, b) if a <= b else (b, a)
    if large < _STIRLING_MIN:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if small < _STIRLING_MIN:
        # ln Gamma(large) - ln Gamma(large + small) without cancelling two big numbers
        s = large + small
        ratio = (
            -(large - 0.5) * math.log1p(small / large)
            - small * math.log(s)
            + small
            + _stirling_delta(large)
            - _stirling_delta(s)
        )
        return math.lgamma(small) + ratio
    s = a + b
    inv_beta = (
        a * math.log1p(b / a)
        + b * math.log1p(a / b)
        + 0.5 * math.log(a * b / s)
        - _LN_SQRT_2PI
        + _stirling_delta(s)
        - _stirling_delta(a)
        - _stirling_delta(b)
    )
    return -inv_beta


def _log1pmx(u: float) -> float:
    """log(1 + u) - u, accurate also for small |u|."""
    if abs(u) > 0.25:
        return math.log1p(u) - u
    # -u^2/2 + u^3/3 - u^4/4 + ...
    term = u
    acc = 0.0
    k = 2
    while True:
        term *= -u
        add = term / k
        acc += add
        if abs(add) <= 1e-18 * abs(acc):
            return acc
        k += 1


def log_beta_kernel(a: float, b: float, x: float, y: float) -> float:
    """ln[x^a y^b / B(a, b)] with y = 1 - x supplied by the caller."""
    if x <= 0.0 or y <= 0.0:
        return -math.inf
    if min(a, b) < _STIRLING_MIN:
        log_x = math.log1p(-y) if y < 0.5 else math.log(x)
        log_y = math.log1p(-x) if x < 0.5 else math.log(y)
        return a * log_x + b * log_y - _log_beta(a, b)
    s = a + b
    x0 = a / s
    y0 = b / s
    e = x - x0 if x < 0.5 else y0 - y
    return (
        a * _log1pmx(e / x0)
        + b * _log1pmx(-e / y0)
        + 0.5 * math.log(a * b / s)
        - _LN_SQRT_2PI
        + _stirling_delta(s)
        - _stirling_delta(a)
        - _stirling_delta(b)
    )


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction of I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    max_iter = 2000 + int(20.0 * math.sqrt(qab))
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def inc_beta_pair(a: float, b: float, x: float, y: float | None = None) -> tuple[float, float]:
    """Return (I_x(a, b), 1 - I_x(a, b)), each accurate in absolute terms.

    The side on which the continued fraction converges fast is evaluated
    directly, so whichever of the two values is the small tail also keeps
    full relative accuracy.
    """
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    x = check_probability("t", x)
    y = 1.0 - x if y is None else float(y)
    if x == 0.0:
        return 0.0, 1.0
    if y == 0.0:
        return 1.0, 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        lead = math.exp(log_beta_kernel(a, b, x, y))
        low = lead * _beta_cf(a, b, x) / a
        low = min(max(low, 0.0), 1.0)
        return low, 1.0 - low
    lead = math.exp(log_beta_kernel(b, a, y, x))
    high = lead * _beta_cf(b, a, y) / b
    high = min(max(high, 0.0), 1.0)
    return 1.0 - high, high


def reg_inc_beta(a: float, b: float, t: float) -> float:
    """Regularized incomplete beta function I_t(a, b) (the beta cdf)."""
    return inc_beta_pair(a, b, t)[0]


def reg_inc_beta_complement(a: float, b: float, t: float) -> float:
    """1 - I_t(a, b), computed without cancellation when it is small."""
    return inc_beta_pair(a, b, t)[1]


def beta_log_pdf(a: float, b: float, t: float) -> float:
    """ln of the beta(a, b) density at t in (0, 1)."""
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    t = check_probability("t", t)
    if t == 0.0 or t == 1.0:
        edge = a if t == 0.0 else b
        if edge < 1.0:
            return math.inf
        if edge > 1.0:
            return -math.inf
        return -_log_beta(a, b)
    y = 1.0 - t
    return log_beta_kernel(a, b, t, y) - math.log(t) - math.log(y)


def binomial_tail_lower(N: int, n: int, eps: float) -> float:
    """P{Bin(N, eps) >= n} = sum_{i=n}^{N} C(N,i) eps^i (1-eps)^(N-i)."""
    N, n = int(N), int(n)
    eps = check_probability("eps", eps)
    if n < 0 or n > N:
        raise DomainError(f"need 0 <= n <= N, got n={n}, N={N}")
    if n == 0:
        return 1.0
    return reg_inc_beta(n, N + 1 - n, eps)


def binomial_tail_upper(N: int, n: int, eps: float) -> float:
    """P{Bin(N, eps) <= n - 1}; the complement of :func:`binomial_tail_lower`."""
    N, n = int(N), int(n)
    eps = check_probability("eps", eps)
    if n < 0 or n > N:
        raise DomainError(f"need 0 <= n <= N, got n={n}, N={N}")
    if n == 0:
        return 0.0
    return reg_inc_beta_complement(n, N + 1 - n, eps)


def log_binomial(d: int, i: int) -> float:
    """ln C(d, i) for integers 0 <= i <= d."""
    if not 0 <= i <= d:
        raise DomainError(f"need 0 <= i <= d, got i={i}, d={d}")
    return -math.log(d + 1.0) - _log_beta(i + 1.0, d - i + 1.0)


def beta_binom_log_pmf(d: int, alpha: float, beta: float, i: int) -> float:
    """ln f_bb(d, alpha, beta; i) = ln[C(d,i) B(i+alpha, d-i+beta) / B(alpha, beta)]."""
    d, i = int(d), int(i)
    alpha = _check_positive("alpha", alpha)
    beta = _check_positive("beta", beta)
    if d < 0 or not 0 <= i <= d:
        raise DomainError(f"need 0 <= i <= d, got i={i}, d={d}")
    return log_binomial(d, i) + _log_beta(i + alpha, d - i + beta) - _log_beta(alpha, beta)


def kahan_sum_exp(log_terms) -> float:
    """sum(exp(l) for l in log_terms) with a max shift and compensated summation."""
    log_terms = list(log_terms)
    if not log_terms:
        return 0.0
    top = max(log_terms)
    if top == -math.inf:
        return 0.0
    total = 0.0
    comp = 0.0
    for lt in log_terms:
        y = math.exp(lt - top) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return math.exp(top) * total


def _bb_range_sum(d: int, alpha: float, beta: float, lo: int, hi: int) -> float:
    log_norm = _log_beta(alpha, beta)
    terms = (
        log_binomial(d, i) + _log_beta(i + alpha, d - i + beta) - log_norm
        for i in range(lo, hi + 1)
    )
    return kahan_sum_exp(terms)


def beta_binom_cdf(d: int, alpha: float, beta: float, z: int) -> float:
    """P{X <= z} for X ~ BetaBinomial(d, alpha, beta), by direct summation."""
    return beta_binom_cdf_pair(d, alpha, beta, z)[0]


def beta_binom_sf(d: int, alpha: float, beta: float, z: int) -> float:
    """P{X > z} for X ~ BetaBinomial(d, alpha, beta)."""
    return beta_binom_cdf_pair(d, alpha, beta, z)[1]


def beta_binom_cdf_pair(d: int, alpha: float, beta: float, z: int) -> tuple[float, float]:
    """(P{X <= z}, P{X > z}), summing the tail that excludes the mean."""
    d, z = int(d), int(z)
    alpha = _check_positive("alpha", alpha)
    beta = _check_positive("beta", beta)
    if d < 0 or not 0 <= z <= d:
        raise DomainError(f"need 0 <= z <= d, got z={z}, d={d}")
    if z == d:
        return 1.0, 0.0
    mean = d * alpha / (alpha + beta)
    if z < mean:
        low = min(_bb_range_sum(d, alpha, beta, 0, z), 1.0)
        return low, 1.0 - low
    high = min(_bb_range_sum(d, alpha, beta, z + 1, d), 1.0)
    return 1.0 - high, high
