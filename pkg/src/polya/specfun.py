r"""Special functions: log-gamma, Pochhammer symbols, modified Bessel I_nu.

Everything here works in double precision and is vectorised over the
argument where that is useful to the quadrature code. Gamma-type
quantities are kept in log space until the last step, because
:math:`\Gamma(2n+1)` overflows near n = 85 while the series terms that
contain it stay small.
"""

import math

import numpy as np

__all__ = [
    "log_gamma",
    "pochhammer",
    "log_pochhammer_seq",
    "bessel_i",
    "bessel_i_asymptotic_coeffs",
    "gamma_product_u3",
    "upper_incomplete_gamma",
    "BESSEL_CROSSOVER",
]

# B_{2k} / (2k (2k-1)) for the Stirling tail.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_EULER = 0.57721566490153286061
_ZETA_LOW = (
    1.6449340668482264365,
    1.2020569031595942854,
    1.0823232337111381915,
    1.0369277551433699263,
    1.0173430619844491397,
    1.0083492773819228268,
    1.0040773561979443394,
    1.0020083928260822144,
)
# (-1)^k zeta(k) / k, k = 2..64, for lnGamma(1 + e) with |e| <= 0.5 + tiny.
_ZETA_SERIES = tuple(
    (-1) ** k
    * (_ZETA_LOW[k - 2] if k < 10 else 1.0 + sum(n ** -float(k) for n in range(2, 40)))
    / k
    for k in range(2, 65)
)
_STIRLING_MIN = 10.0

BESSEL_CROSSOVER = 30.0


def _near_one(eps):
    # lnGamma(1 + eps) = -gamma eps + sum_{k>=2} (-1)^k zeta(k) eps^k / k
    acc = np.zeros_like(eps)
    for c in reversed(_ZETA_SERIES):
        acc = (acc + c) * eps
    return (acc - _EULER) * eps


def _stirling(z):
    zi = 1.0 / z
    zi2 = zi * zi
    corr = np.zeros_like(z)
    for c in reversed(_STIRLING):
        corr = corr * zi2 + c
    return (z - 0.5) * np.log(z) - z + _HALF_LOG_2PI + corr * zi


def log_gamma(x):
    """Natural log of the gamma function for positive real ``x``.

    Accepts a scalar or an array. On [0.5, 2.5) a Taylor series about 1 or
    2 with zeta-function coefficients is summed, so the result keeps full
    relative accuracy at the zeros x = 1, 2. Arguments in [2.5, 10) are
    shifted down into that band with Gamma(x) = (x - 1) Gamma(x - 1); the
    Stirling series covers x >= 10 and reflection covers x < 0.5.

    Raises
    ------
    ValueError
        If any ``x <= 0``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("log_gamma is only defined here for x > 0")
    out = np.empty_like(arr)
    big = arr >= _STIRLING_MIN
    if np.any(big):
        out[big] = _stirling(arr[big])
    small = arr < 0.5
    if np.any(small):
        xs = arr[small]
        out[small] = np.log(np.pi / np.sin(np.pi * xs)) - _near_one(-xs)
    mid = ~small & ~big
    if np.any(mid):
        out[mid] = _log_gamma_mid(arr[mid])
    if out.ndim == 0:
        return float(out)
    return out


def _log_gamma_mid(x):
    # 0.5 <= x < 10
    shift = np.maximum(np.ceil(x - 2.5), 0.0)
    base = x - shift
    prod = np.ones_like(x)
    for j in range(1, int(shift.max(initial=0.0)) + 1):
        prod = np.where(shift >= j, prod * (base + j - 1), prod)
    res = np.empty_like(x)
    lo = base < 1.5
    res[lo] = _near_one(base[lo] - 1.0)
    e = base[~lo] - 2.0
    res[~lo] = np.log1p(e) + _near_one(e)
    return res + np.log(prod)


def log_pochhammer_seq(f, n):
    """Return ``(log|(f)_k|, sign((f)_k))`` for k = 0..n as two arrays.

    Built by cumulative summation of ``log|f + j|`` so consecutive entries
    obey the recurrence (f)_{k+1} = (f)_k (f + k) to rounding. A factor
    ``f + j == 0`` makes every later entry zero (log = -inf, sign = 0).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    factors = f + np.arange(n, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.concatenate(([0.0], np.cumsum(np.log(np.abs(factors)))))
    neg = np.concatenate(([0], np.cumsum(factors < 0)))
    signs = np.where(neg % 2 == 0, 1.0, -1.0)
    zero = np.concatenate(([False], np.cumsum(factors == 0) > 0))
    signs[zero] = 0.0
    logs[zero] = -np.inf
    return logs, signs


def pochhammer(f, k, log=False):
    """Rising factorial (f)_k = f (f+1) ... (f+k-1).

    With ``log=True`` returns ``log|(f)_k|`` and never overflows. The
    linear-scale result raises :class:`OverflowError` when it is not
    representable as a double.
    """
    k = int(k)
    if k < 0:
        raise ValueError("k must be a nonnegative integer")
    if k == 0:
        return 0.0 if log else 1.0
    if not log and k <= 64:
        # direct product: exact for integer f while representable
        val = 1.0
        for j in range(k):
            val *= f + j
        if math.isinf(val):
            raise OverflowError(f"({f})_{k} exceeds the double range; use log=True")
        return val
    if f > 0:
        if k <= 64:
            val = math.fsum(math.log(f + j) for j in range(k))
        else:
            val = log_gamma(f + k) - log_gamma(f)
        sign = 1.0
    else:
        logs, signs = log_pochhammer_seq(f, k)
        val, sign = float(logs[-1]), float(signs[-1])
        if sign == 0.0:
            if log:
                return -math.inf
            return 0.0
    if log:
        return val
    if val > 709.782712893384:
        raise OverflowError(
            f"({f})_{k} = exp({val:.6g}) exceeds the double range; use log=True"
        )
    return sign * math.exp(val)


def _bessel_series(nu, x):
    """Power series sum_k (x/2)^(nu+2k) / (k! Gamma(nu+k+1)), x > 0."""
    q = 0.25 * x * x
    with np.errstate(divide="ignore"):
        lead = nu * np.log(0.5 * x) - log_gamma(nu + 1.0)
    term = np.ones_like(x)
    total = np.ones_like(x)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (nu + k))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    return total, lead


def bessel_i_asymptotic_coeffs(nu, n):
    """Coefficients c_k, k = 0..n, of the large-argument expansion.

    e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k c_k x^{-k}, with
    c_k = (-1)^k prod_{j<=k} (4 nu^2 - (2j-1)^2) / (k! 8^k).
    """
    mu = 4.0 * nu * nu
    out = np.empty(n + 1)
    out[0] = 1.0
    for k in range(1, n + 1):
        out[k] = -out[k - 1] * (mu - (2 * k - 1) ** 2) / (8.0 * k)
    return out


def _bessel_asymptotic(nu, x):
    """Scaled e^{-x} I_nu(x) from the large-argument expansion.

    Sums until terms drop below 1e-17 or stop decreasing (the series is
    asymptotic, so we stop at the smallest term).
    """
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 80):
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        grow = np.abs(new) >= np.abs(term)
        active &= ~grow
        if not np.any(active):
            break
        total = np.where(active, total + new, total)
        term = new
        active &= np.abs(new) > 1e-17 * np.abs(total)
        if not np.any(active):
            break
    return total / np.sqrt(2.0 * np.pi * x)


def bessel_i(nu, x, scaled=False):
    """Modified Bessel function of the first kind, real order ``nu > -1``.

    Parameters
    ----------
    nu : float
        Order. Must exceed -1.
    x : float or array_like
        Nonnegative argument(s).
    scaled : bool
        Return ``exp(-x) * I_nu(x)`` instead of ``I_nu(x)``. The scaled form
        is finite for every x and is what the quadrature code uses.

    Notes
    -----
    Below ``max(30, nu**2)`` the defining power series is summed directly
    (all terms positive for nu > -1); above it the asymptotic expansion
    about ``e^x / sqrt(2 pi x)`` is used.
    """
    if not nu > -1.0:
        raise ValueError(f"Bessel order must satisfy nu > -1, got {nu}")
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)):
        raise ValueError("bessel_i requires x >= 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    cross = max(BESSEL_CROSSOVER, nu * nu)

    zero = flat == 0.0
    if np.any(zero):
        out[zero] = 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf)

    low = (flat > 0) & (flat <= cross)
    if np.any(low):
        xs = flat[low]
        total, lead = _bessel_series(nu, xs)
        if scaled:
            lead = lead - xs
        out[low] = np.exp(lead) * total

    high = flat > cross
    if np.any(high):
        xs = flat[high]
        val = _bessel_asymptotic(nu, xs)
        out[high] = val if scaled else val * np.exp(xs)

    out = out.reshape(arr.shape)
    if out.ndim == 0:
        return float(out)
    return out


def gamma_product_u3():
    """u(3) from the gamma product sqrt(6)/(32 pi^3) G(1/24)G(5/24)G(7/24)G(11/24)."""
    lg = sum(log_gamma(k / 24.0) for k in (1, 5, 7, 11))
    return math.sqrt(6.0) / (32.0 * math.pi**3) * math.exp(lg)


def _e1_series(z):
    # E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
    euler = 0.57721566490153286061
    term = 1.0
    acc = 0.0
    k = 0
    while True:
        k += 1
        term *= -z / k
        inc = term / k
        acc += inc
        if abs(inc) < 1e-17 * max(abs(acc), 1e-300):
            break
    return -euler - math.log(z) - acc


def _gamma_lower_series(s, z):
    # gamma(s, z) = z^s e^{-z} sum_k z^k / (s (s+1) ... (s+k)),  s > 0
    term = 1.0 / s
    acc = term
    k = 0
    while True:
        k += 1
        term *= z / (s + k)
        acc += term
        if term < 1e-17 * acc:
            break
    return math.exp(s * math.log(z) - z) * acc


def _gamma_upper_cf(s, z):
    # modified Lentz on Gamma(s, z) = z^s e^{-z} / (z + 1 - s - 1(1-s)/(z + 3 - s - ...))
    tiny = 1e-300
    b = z + 1.0 - s
    c = 1.0 / tiny
    dd = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = dd
    for i in range(1, 10000):
        an = -i * (i - s)
        b += 2.0
        dd = an * dd + b
        if abs(dd) < tiny:
            dd = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        dd = 1.0 / dd
        delta = dd * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(s * math.log(z) - z) * h


def upper_incomplete_gamma(s, z):
    """Upper incomplete gamma Gamma(s, z) = int_z^inf t^{s-1} e^{-t} dt.

    Any real ``s`` (including zero and negative values) and ``z > 0``.
    Continued fraction for z >= 1.5; for smaller z the lower series
    (s > 0) or downward recurrence from the E1 / positive-order case.
    """
    if not z > 0:
        raise ValueError("upper_incomplete_gamma requires z > 0")
    if z >= 1.5:
        return _gamma_upper_cf(s, z)
    if s > 0:
        return math.exp(log_gamma(s)) - _gamma_lower_series(s, z)
    # Gamma(s, z) = (Gamma(s + 1, z) - z^s e^{-z}) / s, stepped up to s + m > 0
    m = int(math.floor(-s)) + 1
    top = s + m
    if abs(top - 1.0) < 1e-15 and abs(s - round(s)) < 1e-15:
        # integer s: start the recurrence from Gamma(0, z) = E1(z)
        m -= 1
        top = s + m
        val = _e1_series(z)
    else:
        val = upper_incomplete_gamma(top, z)
    for j in range(m, 0, -1):
        a = s + j - 1
        val = (val - math.exp(a * math.log(z) - z)) / a
    return val
