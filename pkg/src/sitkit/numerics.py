"""Special functions and the normal / Student's t distribution functions.

Everything here is pure Python on top of :mod:`math`. The t distribution is
evaluated through the regularized incomplete beta function (Lentz continued
fraction); quantiles are found by safeguarded Newton iteration inside a
bracket. Non-integer degrees of freedom are accepted everywhere.
"""

from __future__ import annotations

import math
from statistics import NormalDist

_STD_NORMAL = NormalDist()

_EPS = 1e-16
_TINY = 1e-300
_CF_MAX_ITER = 100_000

# Degrees of freedom above which the t distribution is replaced by the normal.
_NORMAL_NU = 1e14

QUANTILE_TOL = 1e-9

# Bernoulli-number coefficients of the Stirling series for ln Γ.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def _check_nu(nu: float) -> None:
    if not nu > 0 or math.isnan(nu):
        raise ValueError(f"degrees of freedom must be positive, got {nu!r}")


def _check_open_probability(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie strictly inside (0, 1), got {p!r}")


def log_gamma(x: float) -> float:
    """ln Γ(x) for x > 0."""
    if not x > 0 or math.isinf(x):
        raise ValueError(f"log_gamma requires a finite positive argument, got {x!r}")
    return math.lgamma(x)


def _stirling_tail(x: float) -> float:
    """ln Γ(x) − [(x − ½)ln x − x + ½ ln 2π], valid for x ≥ 10."""
    inv = 1.0 / x
    inv2 = inv * inv
    total = 0.0
    power = inv
    for c in _STIRLING:
        total += c * power
        power *= inv2
    return total


def log_beta(a: float, b: float) -> float:
    """ln B(a, b), accurate even when one argument is very large.

    For large arguments the Stirling forms are differenced analytically so the
    cancellation between ln Γ(a) and ln Γ(a + b) never happens in floating point.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"log_beta requires positive arguments, got a={a!r}, b={b!r}")
    small, big = (a, b) if a <= b else (b, a)
    if big < 10.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    # ln Γ(big) − ln Γ(big + small)
    s = big + small
    diff = (
        -(big - 0.5) * math.log1p(small / big)
        - small * math.log(s)
        + small
        + _stirling_tail(big)
        - _stirling_tail(s)
    )
    return math.lgamma(small) + diff


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _ibeta_front(a: float, b: float, log_x: float, log_1mx: float) -> float:
    return math.exp(a * log_x + b * log_1mx - log_beta(a, b))


def _ibeta_logs(a: float, b: float, x: float, log_x: float, log_1mx: float) -> float:
    # The continued fraction converges fast for x < (a + 1) / (a + b + 2);
    # otherwise evaluate the complement through the symmetry relation.
    if x < (a + 1.0) / (a + b + 2.0):
        return _ibeta_front(a, b, log_x, log_1mx) * _beta_cf(a, b, x) / a
    return 1.0 - _ibeta_front(b, a, log_1mx, log_x) * _beta_cf(b, a, 1.0 - x) / b


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 ≤ x ≤ 1."""
    if not (a > 0 and b > 0):
        raise ValueError(f"shape parameters must be positive, got a={a!r}, b={b!r}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    value = _ibeta_logs(a, b, x, math.log(x), math.log1p(-x))
    return min(1.0, max(0.0, value))


def normal_cdf(z: float) -> float:
    """Standard normal CDF."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_sf(z: float) -> float:
    """Standard normal upper tail 1 − Φ(z), without cancellation for large z."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf`."""
    _check_open_probability(p)
    return _STD_NORMAL.inv_cdf(p)


def _t_tail(t: float, nu: float) -> float:
    """P(T > |t|) for T ~ t_nu."""
    t2 = t * t
    if t2 == 0.0:
        return 0.5
    # x = nu / (nu + t²) and 1 − x = t² / (nu + t²), each formed without cancellation.
    denom = nu + t2
    x = nu / denom
    one_minus_x = t2 / denom
    log_x = -math.log1p(t2 / nu)
    log_1mx = math.log(one_minus_x)
    a = 0.5 * nu
    if x < (a + 1.0) / (a + 2.5):
        return 0.5 * _ibeta_front(a, 0.5, log_x, log_1mx) * _beta_cf(a, 0.5, x) / a
    # Small |t|: tail = ½ − ½ I_{1−x}(½, a).
    inner = _ibeta_front(0.5, a, log_1mx, log_x) * _beta_cf(0.5, a, one_minus_x) / 0.5
    return 0.5 - 0.5 * inner


def t_cdf(t: float, nu: float) -> float:
    """CDF of Student's t distribution with ``nu`` (possibly non-integer) degrees of freedom."""
    _check_nu(nu)
    if math.isnan(t):
        raise ValueError("t must not be NaN")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    if math.isinf(nu) or nu > _NORMAL_NU:
        return normal_cdf(t)
    tail = _t_tail(t, nu)
    return 1.0 - tail if t > 0 else tail


def t_sf(t: float, nu: float) -> float:
    """Upper tail P(T > t); exact for large t where 1 − t_cdf would cancel."""
    _check_nu(nu)
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    if math.isinf(nu) or nu > _NORMAL_NU:
        return normal_sf(t)
    tail = _t_tail(t, nu)
    return tail if t > 0 else 1.0 - tail


def t_pdf(t: float, nu: float) -> float:
    """Density of Student's t distribution."""
    _check_nu(nu)
    if math.isinf(nu) or nu > _NORMAL_NU:
        return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    log_norm = -0.5 * math.log(nu) - log_beta(0.5 * nu, 0.5)
    return math.exp(log_norm - 0.5 * (nu + 1.0) * math.log1p(t * t / nu))


def t_quantile(p: float, nu: float) -> float:
    """Inverse of :func:`t_cdf`, to within :data:`QUANTILE_TOL` in t."""
    _check_open_probability(p)
    _check_nu(nu)
    if math.isinf(nu) or nu > _NORMAL_NU:
        return normal_quantile(p)
    if p == 0.5:
        return 0.0
    # Solve in the lower tail for accuracy, then reflect.
    upper = p > 0.5
    q = 1.0 - p if upper else p
    if nu == 1.0:
        root = math.tan(math.pi * (q - 0.5))
    elif nu == 2.0:
        root = (2.0 * q - 1.0) / math.sqrt(2.0 * q * (1.0 - q))
    else:
        root = _solve_lower_tail(q, nu)
    return -root if upper else root


def _solve_lower_tail(q: float, nu: float) -> float:
    """Root t < 0 of t_cdf(t, nu) = q for q < ½."""
    lo = normal_quantile(q)  # t quantiles are heavier-tailed, so this sits above the root
    hi = 0.0
    step = max(1.0, abs(lo))
    while t_cdf(lo, nu) > q:
        hi = lo
        lo -= step
        step *= 2.0
    guess = _cornish_fisher(q, nu)
    t = guess if lo < guess < hi else 0.5 * (lo + hi)
    for _ in range(200):
        f = t_cdf(t, nu) - q
        if f > 0:
            hi = t
        else:
            lo = t
        dens = t_pdf(t, nu)
        newton = t - f / dens if dens > 0 else None
        if newton is None or not lo < newton < hi:
            newton = 0.5 * (lo + hi)
        if abs(newton - t) <= QUANTILE_TOL * max(1.0, abs(t)) * 1e-3:
            return newton
        t = newton
        if hi - lo <= QUANTILE_TOL * 1e-3 * max(1.0, abs(t)):
            return 0.5 * (lo + hi)
    return t


def _cornish_fisher(q: float, nu: float) -> float:
    z = normal_quantile(q)
    z2 = z * z
    return z + z * (z2 + 1.0) / (4.0 * nu) + z * ((5.0 * z2 + 16.0) * z2 + 3.0) / (96.0 * nu * nu)


def chi2_sf_1df(x: float) -> float:
    """Upper tail of the chi-square distribution with one degree of freedom."""
    if x < 0:
        raise ValueError(f"chi-square statistic must be nonnegative, got {x!r}")
    return math.erfc(math.sqrt(0.5 * x))


def kolmogorov_sf(x: float, terms: int = 100) -> float:
    """Asymptotic Kolmogorov survival function Q(x) = 2 Σ (−1)^{k−1} e^{−2k²x²}."""
    if x <= 0:
        return 1.0
    if x < 0.2:
        # The alternating series loses all precision near zero; Q(x) ≥ 1 − 1e-40 here.
        return 1.0
    total = 0.0
    for k in range(1, terms + 1):
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < 1e-300:
            break
    return min(1.0, max(0.0, 2.0 * total))


def binomial_sf(k: int, n: int, p: float) -> float:
    """P(X ≥ k) for X ~ Binomial(n, p)."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    return regularized_incomplete_beta(k, n - k + 1, p)
