"""Monte Carlo estimate of the return probability on Z^d.

Walks are simulated exactly but not step by step. A walk at L1 distance r
from the origin needs at least r steps to get back, so the next r - 1
steps cannot contain a return and their net displacement is drawn in one
go: axis counts from a multinomial, signs from binomials. Far from the
origin this advances a walk by O(sqrt(n)) steps per draw, which is what
makes a 10^6-step horizon affordable.

Random numbers come from a counter-based SplitMix64 stream keyed by
(seed, walk index), so results do not depend on the number of workers.
"""

import math
from dataclasses import dataclass

import numba
import numpy as np
from numba import njit, prange

from .errors import ResourceError

# the bundled TBB is too old for numba and only produces a warning when probed
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__all__ = ["WalkConfig", "WalkEstimate", "simulate_returns", "estimate_return"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 1.0 / 9007199254740992.0

# log(k!) - Stirling(k) for k < 10
_FC_TABLE = np.array(
    [
        math.lgamma(k + 1.0)
        - ((k + 0.5) * math.log(k + 1.0) - (k + 1.0) + 0.5 * math.log(2.0 * math.pi))
        for k in range(10)
    ]
)


@dataclass(frozen=True)
class WalkConfig:
    d: int
    walks: int
    horizon: int
    seed: int = 0
    workers: int = 1
    step_budget: int = 10**13

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.walks < 1:
            raise ValueError("walks must be >= 1")
        if self.horizon < 2:
            raise ValueError("horizon must be >= 2: a return takes at least two steps")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class WalkEstimate:
    p_hat: float
    std_err: float
    ci95: tuple
    returned: int
    truncated: int
    walks: int
    horizon: int


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _next(state):
    state[1] += np.uint64(1)
    return _mix(state[0] + state[1] * _GOLDEN)


@njit(inline="always")
def _uniform(state):
    return (_next(state) >> np.uint64(11)) * _TO_UNIT


@njit(inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit
def _half_binomial(state, n):
    # Binomial(n, 1/2) as the number of set bits among n fair random bits
    s = 0
    while n >= 64:
        s += _popcount(_next(state))
        n -= 64
    if n > 0:
        s += _popcount(_next(state) & ((np.uint64(1) << np.uint64(n)) - np.uint64(1)))
    return s


@njit
def _fc(k):
    if k < 10:
        return _FC_TABLE[k]
    r = 1.0 / (k + 1.0)
    r2 = r * r
    return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 * r2) * r2) * r


@njit
def _binomial(state, n, p):
    """Exact Binomial(n, p): inversion for n p < 10, Hormann's BTRD otherwise."""
    if n == 0:
        return 0
    flip = p > 0.5
    if flip:
        p = 1.0 - p
    x = 0
    if n * p < 10.0:
        q = 1.0 - p
        s = p / q
        a = (n + 1) * s
        while True:
            r = q**n
            u = _uniform(state)
            x = 0
            ok = True
            while u > r:
                u -= r
                x += 1
                if x > n:
                    ok = False
                    break
                r *= a / x - s
            if ok:
                break
    else:
        m = int(math.floor((n + 1) * p))
        r = p / (1.0 - p)
        nr = (n + 1) * r
        npq = n * p * (1.0 - p)
        sq = math.sqrt(npq)
        b = 1.15 + 2.53 * sq
        a = -0.0873 + 0.0248 * b + 0.01 * p
        c = n * p + 0.5
        alpha = (2.83 + 5.1 / b) * sq
        vr = 0.92 - 4.2 / b
        urvr = 0.86 * vr
        while True:
            v = _uniform(state)
            if v <= urvr:
                u = v / vr - 0.43
                x = int(math.floor((2 * a / (0.5 - abs(u)) + b) * u + c))
                break
            if v >= vr:
                u = _uniform(state) - 0.5
            else:
                u = v / vr - 0.93
                u = (-0.5 if u < 0 else 0.5) - u
                v = _uniform(state) * vr
            us = 0.5 - abs(u)
            k = int(math.floor((2 * a / us + b) * u + c))
            if k < 0 or k > n:
                continue
            v = v * alpha / (a / (us * us) + b)
            km = abs(k - m)
            if km <= 15:
                f = 1.0
                if m < k:
                    for i in range(m + 1, k + 1):
                        f *= nr / i - r
                elif m > k:
                    for i in range(k + 1, m + 1):
                        v *= nr / i - r
                if v <= f:
                    x = k
                    break
                continue
            v = math.log(v)
            rho = (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6) / npq + 0.5)
            t = -km * km / (2 * npq)
            if v < t - rho:
                x = k
                break
            if v > t + rho:
                continue
            nm = n - m + 1
            h = (m + 0.5) * math.log((m + 1) / (r * nm)) + _fc(m) + _fc(n - m)
            nk = n - k + 1
            if v <= (
                h
                + (n + 1) * math.log(nm / nk)
                + (k + 0.5) * math.log(nk * r / (k + 1))
                - _fc(k)
                - _fc(n - k)
            ):
                x = k
                break
    return n - x if flip else x


@njit
def _walk_key(seed, index):
    return _mix(_mix(np.uint64(seed) * _GOLDEN) ^ _mix(np.uint64(index) + _GOLDEN))


@njit
def _first_return(key, d, horizon):
    """Step of the first return to the origin, or -1 if none by ``horizon``.

    The jump length never depends on ``horizon``, so the same key yields
    the same trajectory for every horizon.
    """
    state = np.zeros(2, np.uint64)
    state[0] = key
    pos = np.zeros(d, np.int64)
    n = 0
    dist = 0
    while True:
        if dist >= 3:
            k = dist - 1
            if n + k > horizon:
                return -1
            rem = k
            for i in range(d - 1):
                if d - i == 2:
                    on_axis = _half_binomial(state, rem)
                else:
                    on_axis = _binomial(state, rem, 1.0 / (d - i))
                plus = _half_binomial(state, on_axis)
                pos[i] += 2 * plus - on_axis
                rem -= on_axis
            plus = _half_binomial(state, rem)
            pos[d - 1] += 2 * plus - rem
            n += k
        else:
            if n + 1 > horizon:
                return -1
            r = int(_uniform(state) * 2 * d)
            pos[r >> 1] += 1 - 2 * (r & 1)
            n += 1
        dist = 0
        for i in range(d):
            dist += abs(pos[i])
        if dist == 0:
            return n


@njit(parallel=True, cache=True)
def _simulate(seed, walks, d, horizon):
    out = np.empty(walks, np.int64)
    for w in prange(walks):
        out[w] = _first_return(_walk_key(seed, w), d, horizon)
    return out


def simulate_returns(cfg):
    """First-return step for every walk (-1 when none within the horizon)."""
    if cfg.walks * cfg.horizon > cfg.step_budget:
        raise ResourceError(
            f"walks * horizon = {cfg.walks * cfg.horizon:.3g} exceeds the step "
            f"budget {cfg.step_budget:.3g}"
        )
    previous = numba.get_num_threads()
    numba.set_num_threads(min(cfg.workers, numba.config.NUMBA_NUM_THREADS))
    try:
        return _simulate(cfg.seed, cfg.walks, cfg.d, cfg.horizon)
    finally:
        numba.set_num_threads(previous)


def estimate_return(cfg):
    """Estimate p(d) as the fraction of walks that return within the horizon.

    The estimate is biased low by returns that happen after the horizon;
    that bias is reported through ``truncated`` (walks with no return
    observed) rather than corrected.
    """
    steps = simulate_returns(cfg)
    returned = int(np.count_nonzero(steps >= 0))
    p_hat = returned / cfg.walks
    se = math.sqrt(p_hat * (1.0 - p_hat) / cfg.walks)
    return WalkEstimate(
        p_hat=p_hat,
        std_err=se,
        ci95=(p_hat - 1.96 * se, p_hat + 1.96 * se),
        returned=returned,
        truncated=cfg.walks - returned,
        walks=cfg.walks,
        horizon=cfg.horizon,
    )
