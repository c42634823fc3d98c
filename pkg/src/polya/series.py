"""Series evaluation of u(d), the Lauricella F_C function and p(d).

The return constant is

    u(d) = F_C^{(d)}(1, 1/2; 1, ..., 1; 1/d^2, ..., 1/d^2)
         = sum_n (2n)! c_d(n) / (2d)^{2n},

where c_d(n) = sum_{k_1+...+k_d = n} prod_j 1/(k_j!)^2. Collapsing the
d-fold sum onto the total degree n turns an O(N^d) sum into a single
series whose coefficients come from d-1 convolutions. The single series
converges like sum n^{-d/2}, which for d = 3 is far too slow to sum
directly, so the remainder is extrapolated from a fitted power-law tail.
"""

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import ConstraintError, ConvergenceWarning, DivergenceError
from .specfun import log_gamma, log_pochhammer_seq, pochhammer, gamma_product_u3

__all__ = [
    "SeriesConfig",
    "LauricellaParams",
    "UValue",
    "Method",
    "ReturnProbability",
    "MultiCoeffTable",
    "sum_multi_coeff",
    "u_series",
    "u_terms",
    "lauricella_fc",
    "return_probability",
]

_EPS = np.finfo(float).eps
# correction terms in the fitted tail t_n ~ n^{-d/2} sum_j b_j n^{-j}
_TAIL_ORDER = 3
_MIN_FIT_N = 32
_START_N = 256
_FULL_CONV_LIMIT = 2048


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy shared by the series routes.

    ``tolerance`` is the target relative error, ``n_max`` a hard cap on the
    total degree and ``tail_model`` switches power-law tail extrapolation.
    """

    tolerance: float = 1e-10
    n_max: int = 200_000
    tail_model: bool = True

    def __post_init__(self):
        if not 0 < self.tolerance < 1:
            raise ValueError("tolerance must lie in (0, 1)")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError("n_max must be a nonnegative integer")


@dataclass(frozen=True)
class LauricellaParams:
    """Arguments (a, b; c_1..c_d; x_1..x_d) of F_C^{(d)}."""

    a: float
    b: float
    c: tuple
    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if len(self.c) != len(self.x):
            raise ConstraintError(
                "argument", f"len(c)={len(self.c)} differs from len(x)={len(self.x)}"
            )
        if not self.c:
            raise ConstraintError("argument", "F_C needs at least one variable")
        for cj in self.c:
            if cj <= 0 and cj == round(cj):
                raise ConstraintError(
                    "argument", f"c_j = {cj} is a nonpositive integer; F_C is undefined"
                )

    @property
    def d(self):
        return len(self.c)

    @property
    def radius(self):
        """sum_j sqrt|x_j|; the series converges when this is below 1."""
        return sum(math.sqrt(abs(v)) for v in self.x)


@dataclass(frozen=True)
class UValue:
    d: int
    value: float
    error_estimate: float
    terms_used: int
    tail_added: float


class Method(str, enum.Enum):
    SERIES = "series"
    QUADRATURE = "quadrature"
    GAMMA_PRODUCT = "gamma_product"


@dataclass(frozen=True)
class ReturnProbability:
    d: int
    p: float
    method: Method
    error_estimate: float = 0.0
    u: float = field(default=math.nan, repr=False)


@dataclass(frozen=True)
class MultiCoeffTable:
    """log c_d(n) for n = 0..n_max.

    c_d(n) = sum over k_1 + ... + k_d = n of prod_j 1/(k_j!)^2.
    """

    d: int
    log_coeffs: np.ndarray

    def __len__(self):
        return len(self.log_coeffs)

    def __getitem__(self, n):
        return math.exp(self.log_coeffs[n])

    @property
    def n_max(self):
        return len(self.log_coeffs) - 1


def _check_dimension(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if d < 3:
        raise DivergenceError(int(d))
    return int(d)


def _log_convolve(la, lb):
    """log of the Cauchy product of two positive sequences given as logs.

    Past ``_FULL_CONV_LIMIT`` only a window around the peak of each
    inner sum is visited; the window is widened (or abandoned) whenever an
    edge term is not negligible, so the result is the full sum to rounding.
    """
    n = len(la)
    out = np.empty(n)
    peak = 0
    for k in range(n):
        if k < _FULL_CONV_LIMIT:
            lo, hi = 0, k
        else:
            half = int(12 * math.sqrt(k)) + 64
            lo, hi = max(0, peak - half), min(k, peak + half + 1)
        while True:
            v = la[lo:hi + 1] + lb[k - lo:k - hi - 1 if k - hi - 1 >= 0 else None:-1]
            top = v.max()
            edge_lo = lo > 0 and v[0] > top - 60.0
            edge_hi = hi < k and v[-1] > top - 60.0
            if not (edge_lo or edge_hi):
                break
            lo, hi = 0, k
        peak = lo + int(v.argmax())
        out[k] = top + math.log(np.exp(v - top).sum())
    return out


def sum_multi_coeff(d, n_max):
    """Coefficients c_d(n), n = 0..n_max, by repeated log-space convolution.

    c_1(n) = 1/(n!)^2 and c_{j+1}(n) = sum_m c_j(m) / ((n - m)!)^2.
    """
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    if int(n_max) != n_max or n_max < 0:
        raise ValueError("n_max must be a nonnegative integer")
    base = -2.0 * log_gamma(np.arange(1.0, n_max + 2.0))
    logs = base.copy()
    for _ in range(int(d) - 1):
        logs = _log_convolve(logs, base)
    logs.setflags(write=False)
    return MultiCoeffTable(int(d), logs)


def u_terms(d, n_max, table=None):
    """Terms t_n = (2n)! c_d(n) / (2d)^{2n} for n = 0..n_max.

    t_n is also the probability that the walk sits at the origin after 2n
    steps, so sum_n t_n = u(d).
    """
    if table is None or table.n_max < n_max:
        table = sum_multi_coeff(d, n_max)
    n = np.arange(n_max + 1.0)
    logs = log_gamma(2.0 * n + 1.0) + table.log_coeffs[: n_max + 1] - 2.0 * n * math.log(2.0 * d)
    return np.exp(logs)


def _power_tail(s, start, eps=0.0):
    """sum_{n >= start} n^{-s} exp(-eps n), for s > 1 when eps == 0.

    eps == 0 is a Hurwitz zeta value. For eps > 0 the sum is evaluated by
    Euler-Maclaurin about ``start`` with the integral written as an upper
    incomplete gamma function.
    """
    from .specfun import upper_incomplete_gamma

    if eps == 0.0:
        return float(zeta(s, start))
    a = float(start)
    f = a ** -s * math.exp(-eps * a)
    integral = eps ** (s - 1.0) * upper_incomplete_gamma(1.0 - s, eps * a)

    def deriv(m):
        # d^m/dx^m of x^{-s} e^{-eps x} at x = a
        acc = 0.0
        for i in range(m + 1):
            acc += (
                math.comb(m, i)
                * (-1) ** i
                * pochhammer(s, i)
                * a ** (-i)
                * (-eps) ** (m - i)
            )
        return acc * f

    bern = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)
    total = integral + 0.5 * f
    for k, b2k in enumerate(bern, start=1):
        total -= b2k / math.factorial(2 * k) * deriv(2 * k - 1)
    return total


def _fit_tail(t, d, n, order, ratio=1.0):
    """Partial sum through n plus the fitted remainder; returns (total, tail).

    Fits t_m m^{d/2} = sum_{j<=order} beta_j (n/m)^j on m in [n/2, n], then
    sums the fitted form (times ratio^m) over m > n.
    """
    m = np.arange(n // 2, n + 1, dtype=float)
    y = t[n // 2: n + 1] * m ** (d / 2.0)
    basis = np.stack([(n / m) ** j for j in range(order + 1)], axis=1)
    beta, *_ = np.linalg.lstsq(basis, y, rcond=None)
    eps = -math.log(ratio) if ratio != 1.0 else 0.0
    w = ratio ** np.arange(n + 1.0) if ratio != 1.0 else None
    head = math.fsum(t[: n + 1] * w) if w is not None else math.fsum(t[: n + 1])
    tail = math.fsum(
        beta[j] * n**j * _power_tail(d / 2.0 + j, n + 1, eps) for j in range(order + 1)
    )
    return head + tail, tail


def _u_family(d, cfg, ratio=1.0):
    """sum_n t_n ratio^n for 0 <= ratio <= 1 (ratio = 1 gives u(d))."""
    if cfg.n_max == 0:
        return UValue(d, 1.0, 0.0, 1, 0.0)
    if not cfg.tail_model or cfg.n_max < _MIN_FIT_N:
        return _u_plain(d, cfg, ratio)
    n = min(_START_N, cfg.n_max)
    best = None
    while True:
        t = u_terms(d, n)
        value, tail = _fit_tail(t, d, n, _TAIL_ORDER, ratio)
        lower, _ = _fit_tail(t, d, n, _TAIL_ORDER - 1, ratio)
        half, _ = _fit_tail(t, d, n // 2, _TAIL_ORDER, ratio)
        err = max(abs(value - lower), abs(value - half)) + n * _EPS * abs(value)
        res = UValue(d, value, err, n + 1, tail)
        # past the rounding floor of the log-space terms, more terms only add noise
        if best is not None and err >= best.error_estimate:
            return best
        if err <= cfg.tolerance * abs(value) or n >= cfg.n_max:
            return res
        best = res
        n = min(2 * n, cfg.n_max)


def _u_plain(d, cfg, ratio=1.0):
    """Truncated sum through n_max with no tail model.

    The error estimate integrates the n^{-d/2} power law beyond the last
    term; it is an estimate, not a bound.
    """
    n = cfg.n_max
    t = u_terms(d, n)
    w = ratio ** np.arange(n + 1.0)
    value = math.fsum(t * w)
    last = t[-1] * w[-1]
    if ratio < 1.0:
        err = last * ratio / (1.0 - ratio)
    else:
        err = last * n / (d / 2.0 - 1.0) if n > 0 else math.inf
    return UValue(d, value, err, n + 1, 0.0)


def u_series(d, cfg=None):
    """u(d) from the collapsed Lauricella series, d >= 3.

    Returns a :class:`UValue` whose ``error_estimate`` covers truncation and
    the tail model. With ``tail_model`` off the sum simply stops at
    ``cfg.n_max``.

    Raises
    ------
    DivergenceError
        For d = 1, 2, where the series is not convergent.
    """
    d = _check_dimension(d)
    cfg = cfg or SeriesConfig()
    return _u_family(d, cfg)


def _is_u_family(params):
    """(1, 1/2; 1..1; x..x) with 0 <= d^2 x <= 1: returns d^2 x or None."""
    if sorted((params.a, params.b)) != [0.5, 1.0]:
        return None
    if any(cj != 1.0 for cj in params.c):
        return None
    x0 = params.x[0]
    if any(abs(v - x0) > 1e-15 * abs(x0) for v in params.x):
        return None
    r = params.d**2 * x0
    if r < 0 or r > 1 + 1e-12:
        return None
    return min(r, 1.0) if abs(r - 1.0) > 1e-13 else 1.0


def _signed_log_convolve(la, sa, lb, sb):
    """Cauchy product of signed sequences stored as (log|v|, sign)."""
    n = len(la)
    out_l = np.full(n, -np.inf)
    out_s = np.zeros(n)
    for k in range(n):
        v = la[: k + 1] + lb[k::-1]
        s = sa[: k + 1] * sb[k::-1]
        live = s != 0
        if not np.any(live):
            continue
        v = v[live]
        s = s[live]
        top = v.max()
        total = math.fsum(s * np.exp(v - top))
        if total != 0.0:
            out_l[k] = top + math.log(abs(total))
            out_s[k] = math.copysign(1.0, total)
    return out_l, out_s


def _variable_logs(cj, xj, n):
    """log|x^k / ((c)_k k!)| and its sign, k = 0..n."""
    pl, ps = log_pochhammer_seq(cj, n)
    k = np.arange(n + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.where(k == 0, 0.0, k * math.log(abs(xj))) if xj != 0 else np.where(k == 0, 0.0, -np.inf)
    sx = np.where((xj < 0) & (k % 2 == 1), -1.0, 1.0)
    if xj == 0:
        sx = np.where(k == 0, 1.0, 0.0)
    return lx - pl - log_gamma(k + 1.0), sx * ps


def _shell_terms(params, n):
    """Signed F_C terms grouped by total degree k = 0..n."""
    la, sa = _variable_logs(params.c[0], params.x[0], n)
    for cj, xj in zip(params.c[1:], params.x[1:]):
        lb, sb = _variable_logs(cj, xj, n)
        la, sa = _signed_log_convolve(la, sa, lb, sb)
    pa, sga = log_pochhammer_seq(params.a, n)
    pb, sgb = log_pochhammer_seq(params.b, n)
    sign = sa * sga * sgb
    with np.errstate(invalid="ignore"):
        logs = pa + pb + la
    terms = np.where(sign != 0, sign * np.exp(np.where(sign != 0, logs, 0.0)), 0.0)
    return terms


def _shell_sum(params, cfg):
    cap = cfg.n_max
    n = min(32, cap)
    while True:
        terms = _shell_terms(params, n)
        value = math.fsum(terms)
        last = abs(terms[-1])
        tail = np.abs(terms[-4:])
        ratio = tail[-1] / tail[-2] if len(tail) > 1 and tail[-2] > 0 else 0.0
        err = last * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
        err = max(err, last)
        if (max(err, tail.max()) <= cfg.tolerance * abs(value) and ratio < 1.0) or n >= cap:
            return value, {"terms_used": n + 1, "last_shell": last, "error_estimate": err}
        n = min(2 * n, cap)


def _compositions(n, d):
    """All d-tuples of nonnegative integers summing to n, as an array."""
    if d == 1:
        return np.array([[n]])
    rows = []
    for bars in itertools.combinations(range(n + d - 1), d - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(n + d - 2 - prev)
        rows.append(parts)
    return np.array(rows, dtype=int)


def _naive_sum(params, cfg):
    """Direct multi-index sum of the F_C definition, shell by shell."""
    d = params.d
    if d > 6:
        raise ValueError("the naive multi-index path is limited to d <= 6")
    cap = cfg.n_max
    logs = [_variable_logs(cj, xj, cap) for cj, xj in zip(params.c, params.x)]
    pa, sga = log_pochhammer_seq(params.a, cap)
    pb, sgb = log_pochhammer_seq(params.b, cap)
    terms = []
    last = 0.0
    n_used = 0
    for n in range(cap + 1):
        ks = _compositions(n, d)
        lsum = np.full(len(ks), pa[n] + pb[n])
        sgn = np.full(len(ks), sga[n] * sgb[n])
        for j in range(d):
            lsum = lsum + logs[j][0][ks[:, j]]
            sgn = sgn * logs[j][1][ks[:, j]]
        with np.errstate(invalid="ignore"):
            shell = np.where(sgn != 0, sgn * np.exp(np.where(sgn != 0, lsum, 0.0)), 0.0)
        terms.extend(shell.tolist())
        last = abs(math.fsum(shell))
        n_used = n
        value = math.fsum(terms)
        if n >= 4 and last <= cfg.tolerance * abs(value) * 1e-3:
            break
    return math.fsum(terms), {"terms_used": n_used + 1, "last_shell": last, "error_estimate": last}


def lauricella_fc(params, cfg=None, method="auto", full_output=False):
    """Lauricella F_C^{(d)}(a, b; c; x) as a truncated series.

    Parameters
    ----------
    params : LauricellaParams
    cfg : SeriesConfig, optional
        ``n_max`` caps the total degree; summation stops early once the
        shells fall below ``tolerance`` relative to the sum.
    method : {"auto", "shell", "naive"}
        ``naive`` enumerates every multi-index (d <= 6). ``shell`` groups
        terms by total degree with log-space convolutions. ``auto`` uses
        the collapsed u(d) series with tail model for the symmetric family
        (1, 1/2; 1..1; x..x), 0 < d^2 x <= 1, and ``shell`` otherwise.
    full_output : bool
        Also return a dict with ``terms_used``, ``last_shell`` and
        ``error_estimate``.

    Warns
    -----
    ConvergenceWarning
        When sum_j sqrt|x_j| >= 1 outside the symmetric family.
    """
    cfg = cfg or SeriesConfig()
    if method not in ("auto", "shell", "naive"):
        raise ValueError(f"unknown method {method!r}")
    info = None
    if method == "auto" and params.d >= 3:
        r = _is_u_family(params)
        if r is not None and r > 0:
            res = _u_family(params.d, cfg, ratio=r)
            info = {
                "terms_used": res.terms_used,
                "last_shell": math.nan,
                "error_estimate": res.error_estimate,
            }
            value = res.value
    if info is None:
        if params.radius >= 1.0:
            warnings.warn(
                f"sum sqrt|x_j| = {params.radius:.6g} >= 1: outside the F_C "
                "convergence domain, the truncated sum may be meaningless",
                ConvergenceWarning,
                stacklevel=2,
            )
        if method == "naive":
            value, info = _naive_sum(params, cfg)
        else:
            value, info = _shell_sum(params, cfg)
    if full_output:
        return value, info
    return value


def return_probability(d, method=Method.SERIES, cfg=None, quad_cfg=None):
    """p(d) = 1 - 1/u(d) for d >= 3 by the requested route.

    ``gamma_product`` is only available for d = 3. The recurrent cases
    d = 1, 2 (p = 1) raise :class:`DivergenceError`.
    """
    method = Method(method)
    d = _check_dimension(d)
    if method is Method.SERIES:
        res = u_series(d, cfg)
        u, err = res.value, res.error_estimate
    elif method is Method.QUADRATURE:
        from .quad import u_quadrature

        res = u_quadrature(d, quad_cfg)
        u, err = res.value, res.error_estimate
    else:
        if d != 3:
            raise ValueError("the gamma-product closed form exists only for d = 3")
        u, err = gamma_product_u3(), 4 * _EPS * 1.52
    return ReturnProbability(d, 1.0 - 1.0 / u, method, err / (u * u), u)
