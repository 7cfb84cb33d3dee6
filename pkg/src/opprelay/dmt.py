"""Outage probability and diversity-order estimation.

Three half-duplex transmission schemes over i.i.d. unit-mean Rayleigh links
at SNR rho, code rate R bits per channel use (log base 2 throughout):

* direct: the source uses the whole slot; outage when
  log2(1 + rho |a_sd|^2) <= R.
* opportunistic decode-and-forward: the best of M relays (largest
  min(|a_sr|^2, |a_rd|^2)) decodes in the first half-slot and re-encodes in
  the second; the destination combines both copies.
* opportunistic amplify-and-forward: the same best relay scales and repeats
  its received signal; the combined mutual information involves
  f(a, b) = ab/(a+b+1).

Outage is a deterministic function of the channel draw (infinite block
length), so curves are Monte Carlo averages over channel realizations only.
The default estimator counts outage indicators. The conditional estimator
averages, per draw of the relay gains, the exact outage probability over
the independent direct link; it is unbiased with far smaller variance deep
in the tail, where indicator counting at feasible trial counts would
return zero events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .rng import run_blocks

__all__ = [
    "Scheme",
    "FixedRate",
    "MultiplexRate",
    "DmtScenario",
    "OutageSample",
    "InsufficientTrialsError",
    "select_best_relay_gains",
    "best_relay_gains_batch",
    "outage_df",
    "outage_af",
    "outage_point",
    "outage_curve",
    "diversity_slope",
    "check_lemma4_inequality",
    "lemma2_exponent",
]


class InsufficientTrialsError(ArithmeticError):
    """A probability cell came back empty; more trials are needed."""


class Scheme(Enum):
    DIRECT = "direct"
    OPP_DF = "opp_df"
    OPP_AF = "opp_af"


@dataclass(frozen=True)
class FixedRate:
    bits_per_use: float

    def __post_init__(self):
        if not self.bits_per_use > 0:
            raise ValueError(f"rate must be positive, got {self.bits_per_use}")

    def rate_at(self, rho: float) -> float:
        return self.bits_per_use


@dataclass(frozen=True)
class MultiplexRate:
    r: float

    def __post_init__(self):
        if not 0.0 < self.r < 0.5:
            raise ValueError(f"multiplexing gain must lie in (0, 0.5), got {self.r}")

    def rate_at(self, rho: float) -> float:
        return self.r * math.log2(rho)


RateRule = Union[FixedRate, MultiplexRate]


@dataclass(frozen=True)
class DmtScenario:
    """One outage-curve experiment."""

    m: int
    snr_db_grid: tuple[float, ...]
    rate_rule: RateRule
    scheme: Scheme
    trials_per_point: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need at least one relay, got m={self.m}")
        if len(self.snr_db_grid) < 1:
            raise ValueError("empty SNR grid")
        if self.trials_per_point < 10_000:
            raise ValueError(f"trials_per_point must be >= 1e4, got {self.trials_per_point}")


@dataclass
class OutageSample:
    """Channel draw for one trial; gains are |a|^2 of the selected round."""

    gain_sd: float
    gain_sr: float
    gain_rd: float
    decoded: Optional[bool] = None  # filled in by outage_df

    def __post_init__(self):
        for name in ("gain_sd", "gain_sr", "gain_rd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def select_best_relay_gains(m: int, rng: np.random.Generator) -> tuple[float, float]:
    """Draw m i.i.d. unit-mean exponential hop pairs, keep the max-min pair."""
    if m < 1:
        raise ValueError(f"need at least one relay, got m={m}")
    g_sr = rng.exponential(size=m)
    g_rd = rng.exponential(size=m)
    j = int(np.argmax(np.minimum(g_sr, g_rd)))
    return float(g_sr[j]), float(g_rd[j])


def best_relay_gains_batch(m: int, rng: np.random.Generator, n: int):
    """(n,) arrays of the selected relay's hop gains; used by the curves and
    available for inspecting the selected-gain law empirically."""
    g_sr = rng.exponential(size=(n, m))
    g_rd = rng.exponential(size=(n, m))
    j = np.argmax(np.minimum(g_sr, g_rd), axis=1)
    rows = np.arange(n)
    return g_sr[rows, j], g_rd[rows, j]


def _check_point(rho: float, rate: float):
    if not (rho > 0 and math.isfinite(rho)):
        raise ValueError(f"rho must be positive, got {rho}")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")


def outage_df(sample: OutageSample, rho: float, rate: float) -> bool:
    """Decode-and-forward outage for one draw; records sample.decoded."""
    _check_point(rho, rate)
    decoded = 0.5 * math.log2(1.0 + rho * sample.gain_sr) > rate
    sample.decoded = decoded
    if decoded:
        return 0.5 * math.log2(1.0 + rho * (sample.gain_sd + sample.gain_rd)) <= rate
    return 0.5 * math.log2(1.0 + rho * sample.gain_sd) <= rate


def _f_relayed(a: float, b: float) -> float:
    return a * b / (a + b + 1.0)


def outage_af(sample: OutageSample, rho: float, rate: float) -> bool:
    """Amplify-and-forward outage for one draw."""
    _check_point(rho, rate)
    info = 0.5 * math.log2(1.0 + rho * sample.gain_sd
                           + _f_relayed(rho * sample.gain_sr, rho * sample.gain_rd))
    return info <= rate


def _indicator_outages(scheme: Scheme, m: int, rho: float, rate: float,
                       n: int, rng: np.random.Generator) -> int:
    if scheme is Scheme.DIRECT:
        thr = (2.0 ** rate - 1.0) / rho
        return int(np.count_nonzero(rng.exponential(size=n) <= thr))
    g = (4.0 ** rate - 1.0) / rho  # half-slot threshold
    u, v = best_relay_gains_batch(m, rng, n)
    g_sd = rng.exponential(size=n)
    if scheme is Scheme.OPP_DF:
        decoded = u > g
        out = np.where(decoded, g_sd + v <= g, g_sd <= g)
        return int(np.count_nonzero(out))
    relayed = _f_relayed(rho * u, rho * v) / rho
    return int(np.count_nonzero(g_sd + relayed <= g))


def _conditional_outages(scheme: Scheme, m: int, rho: float, rate: float,
                         n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Sum and sum of squares of per-trial conditional outage probabilities.

    The direct-link gain is exponential(1) and independent of the relay
    draw, so Pr(outage | relay gains) is 1 - exp(-max(0, g - residual)).
    """
    g = (4.0 ** rate - 1.0) / rho
    u, v = best_relay_gains_batch(m, rng, n)
    if scheme is Scheme.OPP_DF:
        margin = np.where(u > g, np.maximum(0.0, g - v), g)
    elif scheme is Scheme.OPP_AF:
        margin = np.maximum(0.0, g - _f_relayed(rho * u, rho * v) / rho)
    else:
        raise ValueError("conditional estimator needs a relaying scheme; for the "
                         "direct link it would degenerate to the closed form")
    x = -np.expm1(-margin)
    return float(np.sum(x)), float(np.sum(x * x))


def outage_point(
    scheme: Scheme,
    m: int,
    rho: float,
    rate: float,
    trials: int,
    rng,
    estimator: str = "indicator",
    threads: int = 1,
) -> tuple[float, float]:
    """Outage probability and standard error at a single SNR point.

    `rng` is a master seed int or a Generator; trial blocks are keyed by
    index so the estimate is independent of `threads`.
    """
    _check_point(rho, rate)
    tags = ("outage", scheme.value, estimator, f"{rho:.12g}", f"{rate:.12g}")
    if estimator == "indicator":
        counts = run_blocks(trials, lambda n, rng: _indicator_outages(scheme, m, rho, rate, n, rng),
                            rng, tags=tags, threads=threads)
        pe = sum(counts) / trials
        se = math.sqrt(pe * (1.0 - pe) / trials)
        return pe, se
    if estimator == "conditional":
        parts = run_blocks(trials, lambda n, rng: _conditional_outages(scheme, m, rho, rate, n, rng),
                           rng, tags=tags, threads=threads)
        total = sum(p[0] for p in parts)
        total_sq = sum(p[1] for p in parts)
        pe = total / trials
        var = max(total_sq / trials - pe * pe, 0.0)
        return pe, math.sqrt(var / trials)
    raise ValueError(f"unknown estimator {estimator!r}")


def outage_curve(
    scn: DmtScenario,
    rng,
    estimator: str = "indicator",
    threads: int = 1,
    trials_schedule: Optional[Sequence[int]] = None,
) -> list[tuple[float, float, float]]:
    """Monte Carlo outage curve: one (rho_db, Pe, std_error) row per point.

    trials_schedule optionally overrides trials_per_point per grid entry
    (tail points need more trials than the knee of the curve).
    """
    if trials_schedule is not None and len(trials_schedule) != len(scn.snr_db_grid):
        raise ValueError("trials_schedule must match the SNR grid length")
    rows = []
    for i, rho_db in enumerate(scn.snr_db_grid):
        rho = 10.0 ** (rho_db / 10.0)
        rate = scn.rate_rule.rate_at(rho)
        trials = scn.trials_per_point if trials_schedule is None else int(trials_schedule[i])
        pe, se = outage_point(scn.scheme, scn.m, rho, rate, trials, rng,
                              estimator=estimator, threads=threads)
        rows.append((rho_db, pe, se))
    return rows


def diversity_slope(curve: Sequence[tuple], fit_window: tuple[float, float]) -> float:
    """Least-squares slope of -log10 Pe against log10 rho inside fit_window.

    curve rows are (rho_db, Pe, ...) as produced by outage_curve. Raises
    InsufficientTrialsError if any selected Pe is zero.
    """
    lo, hi = fit_window
    pts = [(row[0], row[1]) for row in curve if lo <= row[0] <= hi]
    if len(pts) < 3:
        raise ValueError(f"need >= 3 points inside the fit window, got {len(pts)}")
    for rho_db, pe in pts:
        if pe <= 0.0:
            raise InsufficientTrialsError(
                f"Pe = 0 at {rho_db} dB; raise the trial count to resolve the tail")
    x = np.array([p[0] / 10.0 for p in pts])        # log10(rho)
    y = np.array([-math.log10(p[1]) for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def check_lemma4_inequality(a: float, b: float, rho: float, r: float) -> bool:
    """Event-inclusion test behind the amplify-and-forward tail bound.

    Whenever f(rho a, rho b) <= rho^{2r}, the weaker hop must satisfy
    min(a, b) <= rho^{2r-1} + rho^{r-1} sqrt(1 + rho^{2r}). Returns True when
    the implication holds for this sample (vacuously if the antecedent fails).
    """
    if not (a > 0 and b > 0):
        raise ValueError("gains must be positive")
    if not rho > 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    if not 0.0 < r < 0.5:
        raise ValueError(f"r must lie in (0, 0.5), got {r}")
    if _f_relayed(rho * a, rho * b) > rho ** (2 * r):
        return True
    bound = rho ** (2 * r - 1.0) + rho ** (r - 1.0) * math.sqrt(1.0 + rho ** (2 * r))
    return min(a, b) <= bound


def lemma2_exponent(m: int, v: float = 1.0, rho_grid: Optional[Sequence[float]] = None) -> float:
    """Finite-rho decay exponent of Pr(max of m i.i.d. Exp(1) <= rho^-v).

    The probability is (1 - exp(-rho^-v))^m exactly; the fitted slope of its
    -log against log rho should approach m*v from below as rho grows.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if rho_grid is None:
        rho_grid = np.geomspace(1e4, 1e6, 9)
    rho = np.asarray(rho_grid, dtype=float)
    prob = (-np.expm1(-(rho ** -v))) ** m
    slope, _ = np.polyfit(np.log10(rho), -np.log10(prob), 1)
    return float(slope)
