"""Survival functions used for p-values.

The incomplete gamma and beta functions follow the classic series /
continued-fraction split (modified Lentz for the fractions). The Kolmogorov
distribution uses the alternating series for large arguments and the Jacobi
theta form for small ones, where the alternating series cancels badly.
"""
import math

from ..core.errors import ForensicsError

EPS = 1e-15
FPMIN = 1e-300
MAX_ITER = 10_000


def _gamma_series(a: float, x: float) -> float:
    """Lower regularized gamma P(a, x) by its power series; use for x < a + 1."""
    ap = a
    delta = total = 1.0 / a
    for _ in range(MAX_ITER):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Upper regularized gamma Q(a, x) by continued fraction; use for x >= a + 1."""
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    if a <= 0:
        raise ForensicsError(f"gamma shape must be positive, got {a}")
    if x < 0:
        raise ForensicsError(f"gamma argument must be non-negative, got {x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_continued_fraction(a, x)


def chi_square_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution, Q(df/2, x/2)."""
    if df <= 0:
        raise ForensicsError(f"degrees of freedom must be positive, got {df}")
    if x < 0:
        raise ForensicsError(f"chi-square statistic must be non-negative, got {x}")
    return min(1.0, max(0.0, regularized_gamma_q(df / 2.0, x / 2.0)))


def _beta_continued_fraction(x: float, a: float, b: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h


def regularized_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ForensicsError(f"beta parameters must be positive, got {a}, {b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(x, a, b) / a
    return 1.0 - front * _beta_continued_fraction(1.0 - x, b, a) / b


def f_sf(f: float, d1: float, d2: float) -> float:
    """P(F > f) for an F(d1, d2) variate."""
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return regularized_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0)


def f_cdf(f: float, d1: float, d2: float) -> float:
    if math.isinf(f):
        return 1.0
    if f <= 0:
        return 0.0
    return regularized_beta(d1 * f / (d1 * f + d2), d1 / 2.0, d2 / 2.0)


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with (possibly fractional) df."""
    if math.isinf(t):
        return 0.0
    return min(1.0, regularized_beta(df / (df + t * t), df / 2.0, 0.5))


def kolmogorov_cdf(x: float) -> float:
    """Limiting distribution of sqrt(n) * D_n."""
    if x <= 0:
        return 0.0
    if x < 1.0:
        # Theta form: sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2))
        factor = -(math.pi ** 2) / (8.0 * x * x)
        total = 0.0
        for k in range(1, 100):
            term = math.exp(factor * (2 * k - 1) ** 2)
            total += term
            if term < EPS * total or term == 0.0:
                break
        return math.sqrt(2.0 * math.pi) / x * total
    return 1.0 - kolmogorov_sf(x)


def kolmogorov_sf(x: float) -> float:
    """P(K > x) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)."""
    if x <= 0:
        return 1.0
    if x < 1.0:
        return 1.0 - kolmogorov_cdf(x)
    total = 0.0
    sign = 1.0
    for k in range(1, 100):
        term = math.exp(-2.0 * k * k * x * x)
        total += sign * term
        if term < EPS * abs(total) or term == 0.0:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))
