"""Timer-based distributed best-relay selection.

Each relay scores its two-hop path with a policy function h (minimum or
harmonic mean of the hop power gains), arms a timer T = lambda/h on CTS
reception, and the relay whose timer expires first wins the round. A round
is counted as collided when the runner-up timer lands within the collision
window c of the winner, i.e. before the winner's flag could have silenced
it. All times are in microseconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Policy",
    "TimingParams",
    "SelectionOutcome",
    "policy_value",
    "timer_value",
    "collision_window",
    "run_selection_round",
    "policy_values_array",
    "collision_flags_array",
]


class Policy(Enum):
    MIN = "min"
    HARMONIC = "harmonic"


@dataclass(frozen=True)
class TimingParams:
    """Physical-layer delay constants (microseconds).

    r_max: max relay-relay propagation delay
    n_max: max relay-destination propagation delay
    cts_skew_max: max spread |n_b - n_j| in CTS arrival times
    d_s: receive-to-transmit switch time
    dur: flag packet duration
    hidden: relays cannot hear each other; suppression goes through the
        destination's broadcast
    """

    r_max: float = 1.0 / 3.0
    n_max: float = 1.0 / 3.0
    cts_skew_max: float = 1.0 / 3.0
    d_s: float = 5.0
    dur: float = 1.0
    hidden: bool = False

    def __post_init__(self):
        for name in ("r_max", "n_max", "cts_skew_max", "d_s", "dur"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class SelectionOutcome:
    """Result of one abstract selection round.

    winner is the argmin of the timers (ties broken by lowest index; None
    when every relay has an infinite timer and nobody can fire). collided is
    true when the second-smallest timer is within window_c of the smallest.
    """

    winner: Optional[int]
    timers: tuple[float, ...]
    h_values: tuple[float, ...]
    collided: bool
    window_c: float


def policy_value(policy: Policy, gain_sr: float, gain_rd: float) -> float:
    """End-to-end path quality h for one relay's hop gains."""
    if gain_sr < 0 or gain_rd < 0:
        raise ValueError(f"power gains must be >= 0, got ({gain_sr}, {gain_rd})")
    if policy is Policy.MIN:
        return min(gain_sr, gain_rd)
    if policy is Policy.HARMONIC:
        if gain_sr == 0.0 or gain_rd == 0.0:
            return 0.0
        return 2.0 * gain_sr * gain_rd / (gain_sr + gain_rd)
    raise ValueError(f"unknown policy {policy!r}")


def timer_value(lambda_us: float, h: float) -> float:
    """Timer start value lambda/h; a dead path (h = 0) never fires."""
    if not (lambda_us > 0 and math.isfinite(lambda_us)):
        raise ValueError(f"lambda_us must be positive, got {lambda_us}")
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h}")
    if h == 0.0:
        return math.inf
    return lambda_us / h


def collision_window(t: TimingParams) -> float:
    """Worst-case uncertainty span c within which a second timer still fires."""
    if t.hidden:
        return t.r_max + t.cts_skew_max + 2.0 * t.d_s + t.dur + 2.0 * t.n_max
    return t.r_max + t.cts_skew_max + t.d_s


def run_selection_round(
    policy: Policy,
    lambda_us: float,
    window_c: float,
    gains: Sequence[tuple[float, float]],
) -> SelectionOutcome:
    """Score all relays, arm timers, and judge one selection round."""
    if len(gains) < 1:
        raise ValueError("need at least one relay")
    if window_c < 0:
        raise ValueError(f"window_c must be >= 0, got {window_c}")
    h = [policy_value(policy, g1, g2) for g1, g2 in gains]
    timers = [timer_value(lambda_us, hi) for hi in h]
    order = sorted(range(len(timers)), key=lambda i: (timers[i], i))
    winner = order[0]
    if math.isinf(timers[winner]):
        return SelectionOutcome(None, tuple(timers), tuple(h), False, window_c)
    collided = False
    if len(timers) >= 2:
        second = timers[order[1]]
        collided = second < timers[winner] + window_c
    return SelectionOutcome(winner, tuple(timers), tuple(h), collided, window_c)


def policy_values_array(policy: Policy, g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Vectorized policy_value over matching-shape gain arrays."""
    if np.any(g1 < 0) or np.any(g2 < 0):
        raise ValueError("power gains must be >= 0")
    if policy is Policy.MIN:
        return np.minimum(g1, g2)
    if policy is Policy.HARMONIC:
        s = g1 + g2
        with np.errstate(invalid="ignore", divide="ignore"):
            h = 2.0 * g1 * g2 / s
        return np.where(s > 0, h, 0.0)
    raise ValueError(f"unknown policy {policy!r}")


def collision_flags_array(timers: np.ndarray, window_c: float) -> np.ndarray:
    """Per-round collided flags for a (rounds, M) timer array."""
    if timers.shape[1] < 2:
        return np.zeros(timers.shape[0], dtype=bool)
    two = np.partition(timers, 1, axis=1)
    return two[:, 1] < two[:, 0] + window_c
