"""Quadrature routes to u(d).

``u_quadrature`` integrates the Bessel representation

    u(d) = int_0^inf I_0(x/d)^d e^{-x} dx = int_0^inf [e^{-x/d} I_0(x/d)]^d dx,

so the exponential is absorbed exactly into the scaled Bessel function and
the integrand decays only like x^{-d/2}. The finite piece [0, M] goes to
adaptive Gauss-Legendre panels; the piece beyond M is integrated term by
term from the large-argument expansion of the scaled Bessel function.

``lattice_green_integral`` is a third, independent route: randomized
quasi-Monte Carlo over the torus integral of 1/(d - sum cos x_k).
"""

import heapq
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

from .errors import DivergenceError
from .specfun import bessel_i, bessel_i_asymptotic_coeffs, upper_incomplete_gamma

__all__ = [
    "QuadratureConfig",
    "QuadratureResult",
    "LatticeIntegralConfig",
    "LatticeIntegralResult",
    "default_split_point",
    "adaptive_gauss_legendre",
    "u_integrand",
    "u_quadrature",
    "power_tail_integral",
    "lattice_integrand",
    "lattice_green_integral",
]


def default_split_point(d):
    return max(100.0, 20.0 * d)


@dataclass(frozen=True)
class QuadratureConfig:
    """``split_point`` None means :func:`default_split_point`."""

    split_point: float = None
    panels: int = 2000
    rel_tol: float = 1e-13
    tail_terms: int = 6

    def __post_init__(self):
        if self.split_point is not None and not self.split_point > 0:
            raise ValueError("split_point must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if not 0 <= self.tail_terms <= 6:
            raise ValueError("tail_terms must lie in 0..6")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    finite_part: float
    tail_part: float


@dataclass(frozen=True)
class LatticeIntegralConfig:
    samples: int = 10_000_000
    normalize: bool = True
    replicas: int = 8

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")


@dataclass(frozen=True)
class LatticeIntegralResult:
    value: float
    std_error: float
    samples: int
    normalized: bool


@lru_cache(maxsize=None)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel(f, a, b, order):
    x, w = _gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(w, f(mid + half * x)))


def adaptive_gauss_legendre(f, a, b, rel_tol=1e-13, max_panels=2000, order=20, init=8):
    """Integrate a smooth vectorised ``f`` over [a, b].

    Each panel is rated by comparing its ``order``-point rule with the
    ``order // 2``-point rule; the worst panel is bisected until the summed
    indicator falls below ``rel_tol`` times the integral or the panel budget
    runs out. Returns ``(value, error_estimate)``; the final sum runs over
    panels in left-to-right order so it does not depend on refinement order.
    """
    heap = []
    edges = np.linspace(a, b, init + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        hi_q = _panel(f, lo, hi, order)
        err = abs(hi_q - _panel(f, lo, hi, order // 2))
        heapq.heappush(heap, (-err, lo, hi, hi_q))
    while len(heap) < max_panels:
        total = math.fsum(item[3] for item in heap)
        err_total = math.fsum(-item[0] for item in heap)
        if err_total <= rel_tol * abs(total):
            break
        _, lo, hi, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        for l2, h2 in ((lo, mid), (mid, hi)):
            q = _panel(f, l2, h2, order)
            e = abs(q - _panel(f, l2, h2, order // 2))
            heapq.heappush(heap, (-e, l2, h2, q))
    ordered = sorted(heap, key=lambda item: item[1])
    value = math.fsum(item[3] for item in ordered)
    err = math.fsum(-item[0] for item in ordered)
    return value, err


def _check_dimension(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if d < 3:
        raise DivergenceError(int(d))
    return int(d)


def u_integrand(x, d):
    """[e^{-x/d} I_0(x/d)]^d, which equals I_0(x/d)^d e^{-x}."""
    return bessel_i(0.0, np.asarray(x, dtype=float) / d, scaled=True) ** d


def power_tail_integral(s, start, rate=0.0):
    """int_start^inf x^{s-1} e^{-rate x} dx, for rate > 0 or s < 0."""
    if rate == 0.0:
        if s >= 0:
            raise ValueError("power tail diverges for s >= 0 without decay")
        return -(start**s) / s
    return rate ** (-s) * upper_incomplete_gamma(s, rate * start)


def _product_expansion(coeff_lists, scales, n_terms):
    """Coefficients E_m of prod_j sum_k c_{j,k} (scale_j x)^{-k} in powers of 1/x."""
    out = np.zeros(n_terms + 1)
    out[0] = 1.0
    for coeffs, s in zip(coeff_lists, scales):
        series = np.asarray(coeffs[: n_terms + 1]) * s ** -np.arange(n_terms + 1.0)
        out = np.convolve(out, series)[: n_terms + 1]
    return out


def _omitted_bound(first, second):
    # the omitted terms share one sign, so bound them as a geometric series
    r = abs(second / first) if first != 0.0 else 0.0
    return 2.0 * abs(first) / (1.0 - r) if r < 0.8 else 10.0 * abs(first)


def _u_tail(d, split, tail_terms):
    """Analytic tail beyond ``split`` and a bound on the omitted terms."""
    coeffs = bessel_i_asymptotic_coeffs(0.0, tail_terms + 2)
    e = _product_expansion([coeffs] * d, [1.0 / d] * d, tail_terms + 2)
    pref = (2.0 * math.pi / d) ** (-d / 2.0)
    parts = [
        pref * e[m] * power_tail_integral(1.0 - d / 2.0 - m, split)
        for m in range(tail_terms + 3)
    ]
    return math.fsum(parts[:-2]), _omitted_bound(parts[-2], parts[-1])


def u_quadrature(d, cfg=None):
    """u(d) from the Bessel integral, d >= 3.

    Raises
    ------
    DivergenceError
        For d = 1, 2, where the integral is not convergent.
    """
    d = _check_dimension(d)
    cfg = cfg or QuadratureConfig()
    split = cfg.split_point if cfg.split_point is not None else default_split_point(d)
    finite, ferr = adaptive_gauss_legendre(
        lambda x: u_integrand(x, d), 0.0, split, cfg.rel_tol, cfg.panels
    )
    tail, terr = _u_tail(d, split, cfg.tail_terms)
    return QuadratureResult(finite + tail, ferr + terr, finite, tail)


def lattice_integrand(x):
    """1 / (d - sum_k cos x_k) for points ``x`` of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    return 1.0 / (x.shape[-1] - np.cos(x).sum(axis=-1))


def _folded_integrand(t):
    """Integrand on the unit cube after x_k = pi t_k^2 on the positive orthant.

    The Jacobian prod_k 2 pi t_k cancels the |x|^{-2} singularity at the
    origin far enough that the transformed integrand is square integrable
    for d >= 3. The factor 2^d accounts for folding (-pi, pi)^d onto
    (0, pi)^d, which the integrand's evenness allows.
    """
    d = t.shape[1]
    x = np.pi * t * t
    jac = np.prod(4.0 * np.pi * t, axis=1)
    return jac / (d - np.cos(x).sum(axis=1))


def lattice_green_integral(d, cfg=None, seed=0, batch=1 << 18):
    """Randomized QMC estimate of the torus integral, d >= 3.

    With ``cfg.normalize`` the raw integral is multiplied by d/(2 pi)^d,
    which makes it an estimate of u(d). The estimate averages
    ``cfg.replicas`` independently scrambled Sobol sequences; ``std_error``
    is their standard error. Deterministic for fixed (samples, seed).
    """
    d = _check_dimension(d)
    cfg = cfg or LatticeIntegralConfig()
    per = max(1, cfg.samples // cfg.replicas)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    estimates = []
    tiny = np.finfo(float).tiny
    for r in range(cfg.replicas):
        engine = qmc.Sobol(d, scramble=True, seed=rng.integers(2**63))
        acc = []
        left = per
        while left > 0:
            n = min(batch, left)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                t = engine.random(n)
            # a point exactly at the corner would be the singularity
            t = np.maximum(t, tiny)
            acc.append(_folded_integrand(t).sum())
            left -= n
        estimates.append(math.fsum(acc) / per)
    est = np.array(estimates)
    scale = d / (2.0 * math.pi) ** d if cfg.normalize else 1.0
    value = float(est.mean()) * scale
    if cfg.replicas > 1:
        se = float(est.std(ddof=1) / math.sqrt(cfg.replicas)) * scale
    else:
        se = math.nan
    return LatticeIntegralResult(value, se, per * cfg.replicas, cfg.normalize)
