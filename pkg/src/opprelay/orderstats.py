"""Order statistics of relay timers and collision probability.

The timer of a relay is T = lambda/h, so its law follows from the law of h
by the transform F_T(t) = 1 - CDF_h(lambda/t), f_T(t) = lambda/t^2 *
pdf_h(lambda/t). Closed forms are implemented for Rayleigh hop fading:

* min policy: h = min of two independent exponentials is exponential with
  rate beta1 + beta2, giving F(t) = exp(-(beta1+beta2) lambda / t).
* harmonic policy: the harmonic-mean law involves the modified Bessel
  functions K0, K1.

The probability that the runner-up timer lands within c of the winning
timer among M i.i.d. timers is 1 - I_c with

    I_c = M (M-1) Integral_c^inf f(y) [1-F(y)]^(M-2) F(y-c) dy,

evaluated here by adaptive quadrature after the substitution u = lambda/y,
which maps (c, inf) onto the bounded interval (0, lambda/c) and removes the
heavy timer tail. A vectorized Monte Carlo counting oracle provides the
independent cross-check (and covers non-identical relays, where the i.i.d.
formula does not apply).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bessel import bessel_k, k0, k1
from .fading import FadingKind, RelayProfile, sample_hop_gains
from .rng import run_blocks
from .selection import Policy, collision_flags_array, policy_values_array

__all__ = [
    "TimerDistribution",
    "CollisionQuery",
    "QuadratureError",
    "timer_cdf",
    "timer_pdf",
    "joint_pdf_min_two",
    "collision_prob_analytic",
    "mc_collision_oracle",
    "mc_collision_rate",
    "bessel_k",
]


class QuadratureError(ArithmeticError):
    """Quadrature failed to reach the requested accuracy.

    Carries the partial estimate and the reported error bound.
    """

    def __init__(self, message, partial, estimate):
        super().__init__(message)
        self.partial = partial
        self.estimate = estimate


@dataclass(frozen=True)
class TimerDistribution:
    """Law of one relay timer T = lambda/h under Rayleigh hop fading."""

    policy: Policy
    beta1: float
    beta2: float
    lambda_us: float

    def __post_init__(self):
        for name in ("beta1", "beta2", "lambda_us"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    def cdf(self, t):
        return timer_cdf(self, t)

    def pdf(self, t):
        return timer_pdf(self, t)


def _check_positive_times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("timer distribution is supported on t > 0")
    return arr, np.isscalar(t) or arr.ndim == 0


def timer_cdf(dist: TimerDistribution, t):
    """F(t) = Pr(T <= t); scalar or array t > 0."""
    arr, scalar = _check_positive_times(t)
    s = dist.beta1 + dist.beta2
    lam = dist.lambda_us
    if dist.policy is Policy.MIN:
        out = np.exp(-s * lam / arr)
    else:
        z = lam * math.sqrt(dist.beta1 * dist.beta2) / arr
        out = z * np.exp(-0.5 * s * lam / arr) * k1(z)
        out = np.minimum(out, 1.0)  # z*K1(z) -> 1 from above-rounding as z -> 0
    return float(out) if scalar else out


def timer_pdf(dist: TimerDistribution, t):
    """f(t) = dF/dt; scalar or array t > 0."""
    arr, scalar = _check_positive_times(t)
    s = dist.beta1 + dist.beta2
    lam = dist.lambda_us
    if dist.policy is Policy.MIN:
        out = lam * s / arr**2 * np.exp(-s * lam / arr)
    else:
        prod = dist.beta1 * dist.beta2
        root = math.sqrt(prod)
        z = lam * root / arr
        out = (lam**2 * prod / (2.0 * arr**3) * np.exp(-0.5 * s * lam / arr)
               * (s / root * k1(z) + 2.0 * k0(z)))
    return float(out) if scalar else out


def joint_pdf_min_two(m: int, dist: TimerDistribution, y1, y2):
    """Joint density of the smallest and second-smallest of m i.i.d. timers.

    M (M-1) f(y1) f(y2) [1-F(y2)]^(M-2) on 0 < y1 < y2, zero elsewhere.
    """
    if m < 2:
        raise ValueError(f"joint law of the two smallest needs m >= 2, got {m}")
    a1 = np.asarray(y1, dtype=float)
    a2 = np.asarray(y2, dtype=float)
    scalar = a1.ndim == 0 and a2.ndim == 0
    a1, a2 = np.broadcast_arrays(a1, a2)
    inside = (a1 > 0) & (a1 < a2)
    safe1 = np.where(inside, a1, 1.0)
    safe2 = np.where(inside, a2, 1.0)
    dens = (m * (m - 1) * timer_pdf(dist, safe1) * timer_pdf(dist, safe2)
            * (1.0 - timer_cdf(dist, safe2)) ** (m - 2))
    out = np.where(inside, dens, 0.0)
    return float(out) if scalar else out


@dataclass(frozen=True)
class CollisionQuery:
    """Inputs of one collision-probability evaluation for M i.i.d. timers."""

    m: int
    c_over_lambda: float
    dist: TimerDistribution

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"the two-smallest analysis needs m >= 2, got {self.m} "
                             "(a single relay never collides)")
        if not (self.c_over_lambda >= 0 and math.isfinite(self.c_over_lambda)):
            raise ValueError(f"c_over_lambda must be >= 0, got {self.c_over_lambda}")

    @property
    def window_c(self) -> float:
        return self.c_over_lambda * self.dist.lambda_us


def collision_prob_analytic(q: CollisionQuery, abs_tol: float = 1e-9) -> float:
    """Pr(second-smallest < smallest + c) = 1 - I_c by adaptive quadrature."""
    if q.c_over_lambda == 0.0:
        return 0.0  # two continuous order statistics tie with probability zero
    dist = q.dist
    lam = dist.lambda_us
    c = q.window_c
    m = q.m
    u_hi = lam / c

    def integrand(u):
        y = lam / u
        t = y - c
        if t <= 0.0:
            return 0.0
        tail = 1.0 - timer_cdf(dist, y)
        val = timer_pdf(dist, y) * (lam / u**2) * timer_cdf(dist, t)
        if m > 2:
            val *= tail ** (m - 2)
        return val

    integral, err = integrate.quad(integrand, 0.0, u_hi,
                                   epsabs=abs_tol, epsrel=1e-10, limit=300)
    p = 1.0 - m * (m - 1) * integral
    if err * m * (m - 1) > 1e-6:
        raise QuadratureError(
            f"collision quadrature error estimate {err:.2e} exceeds 1e-6",
            partial=p, estimate=err * m * (m - 1))
    if p < 0.0:
        if p < -1e-12:
            raise QuadratureError(f"quadrature produced {p}, below the roundoff floor",
                                  partial=p, estimate=err)
        p = 0.0
    return min(p, 1.0)


def mc_collision_rate(
    policy: Policy,
    lambda_us: float,
    window_c: float,
    profiles,
    trials: int,
    rng,
    kind: FadingKind = FadingKind.RAYLEIGH,
    k_factor: float = 0.0,
    threads: int = 1,
    stream_tags=("collision-mc",),
) -> tuple[float, float]:
    """Empirical collision rate over `trials` rounds, with binomial std error.

    Accepts arbitrary per-relay profiles and fading, which the closed form
    does not cover. `rng` is a master seed int or a Generator; trials are split into
    index-keyed blocks so the count is independent of `threads`.
    """
    if trials < 10_000:
        raise ValueError(f"need at least 1e4 trials for a usable rate, got {trials}")
    if window_c < 0:
        raise ValueError(f"window_c must be >= 0, got {window_c}")
    profiles = list(profiles)

    def worker(n, rng):
        g1, g2 = sample_hop_gains(profiles, rng, n, kind=kind, k_factor=k_factor)
        h = policy_values_array(policy, g1, g2)
        with np.errstate(divide="ignore"):
            timers = lambda_us / h
        return int(np.count_nonzero(collision_flags_array(timers, window_c)))

    counts = run_blocks(trials, worker, rng, tags=stream_tags, threads=threads)
    p = sum(counts) / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return p, se


def mc_collision_oracle(
    q: CollisionQuery,
    trials: int,
    rng,
    threads: int = 1,
) -> tuple[float, float]:
    """Brute-force counting estimate of the collision probability for `q`.

    Draws M hop-gain pairs per trial under the Rayleigh law implied by the
    query's timer distribution, forms the timers, and counts rounds whose
    second-smallest timer lands within c of the smallest.
    """
    profile = RelayProfile(q.dist.beta1, q.dist.beta2)
    return mc_collision_rate(
        q.dist.policy, q.dist.lambda_us, q.window_c, [profile] * q.m,
        trials, rng, threads=threads,
        stream_tags=("collision-oracle",))
