"""Packet-level simulation of one selection round in continuous time.

Timeline of a round (all times in microseconds, t = 0 at the destination's
CTS transmission): the CTS reaches relay j after the propagation delay n_j;
relay j then counts down its timer T_j and is committed to fire at
F_j = n_j + T_j. The first relay to fire (index b) switches its radio for
d_s and transmits a flag. Relay j stands down only if it hears, strictly
before its own fire instant,

* no hidden relays: b's flag directly, at F_b + d_s + r_bj, or
* hidden relays: the destination's broadcast, which b's flag triggers, at
  F_b + d_s + n_b + d_s + dur + n_j.

A flag landing exactly at the fire instant is too late: the relay is
already committed, so it fires and the round collides (no capture effect
is modeled). The round fails when two or more relays fire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .selection import (Policy, SelectionOutcome, TimingParams,
                        collision_window, policy_values_array)

__all__ = ["NodeGeometry", "RoundTrace", "simulate_round", "simulate_rounds"]


@dataclass(frozen=True)
class NodeGeometry:
    """Planar positions (meters) and signal speed (meters per microsecond)."""

    source: tuple[float, float]
    destination: tuple[float, float]
    relays: tuple[tuple[float, float], ...]
    signal_speed: float = 300.0  # roughly c in m/us

    def __post_init__(self):
        if len(self.relays) < 1:
            raise ValueError("need at least one relay position")
        if not (self.signal_speed > 0 and math.isfinite(self.signal_speed)):
            raise ValueError(f"signal_speed must be positive, got {self.signal_speed}")

    @property
    def m(self) -> int:
        return len(self.relays)

    def relay_dest_delays(self) -> np.ndarray:
        dest = np.asarray(self.destination, dtype=float)
        rel = np.asarray(self.relays, dtype=float)
        return np.linalg.norm(rel - dest, axis=1) / self.signal_speed

    def relay_relay_delays(self) -> np.ndarray:
        rel = np.asarray(self.relays, dtype=float)
        diff = rel[:, None, :] - rel[None, :, :]
        return np.linalg.norm(diff, axis=2) / self.signal_speed


@dataclass(frozen=True)
class RoundTrace:
    """Event record of one simulated round."""

    cts_arrivals: tuple[float, ...]        # n_j
    scheduled_fire: tuple[float, ...]      # n_j + T_j
    hear_times: tuple[float, ...]          # arrival of the suppressing signal (nan for the winner)
    fired: tuple[bool, ...]
    winner_fire_time: float                # nan when nobody fires
    outcome: SelectionOutcome


def _check_geometry(geom: NodeGeometry, timing: TimingParams):
    n = geom.relay_dest_delays()
    r = geom.relay_relay_delays()
    if np.max(n) > timing.n_max:
        raise ValueError(f"relay-destination delay {np.max(n):.6g} exceeds n_max={timing.n_max}")
    if np.max(r) > timing.r_max:
        raise ValueError(f"relay-relay delay {np.max(r):.6g} exceeds r_max={timing.r_max}")
    skew = np.max(n) - np.min(n)
    if skew > timing.cts_skew_max:
        raise ValueError(f"CTS arrival skew {skew:.6g} exceeds cts_skew_max={timing.cts_skew_max}")
    return n, r


def _fired_mask(n, r, timing, fire, m):
    """Boolean fire decisions given scheduled fire times of one or many rounds."""
    finite = np.isfinite(fire)
    b = np.argmin(fire, axis=-1)  # all-dead rounds: fb = inf, nobody fires below
    rounds = fire.shape[0]
    idx = np.arange(rounds)
    fb = fire[idx, b]
    if timing.hidden:
        arrival = (fb[:, None] + 2.0 * timing.d_s + timing.dur
                   + n[b][:, None] + n[None, :])
    else:
        arrival = fb[:, None] + timing.d_s + r[b, :]
    fired = finite & (fire <= arrival) & np.isfinite(fb)[:, None]
    return fired, b, arrival


def simulate_rounds(
    geom: NodeGeometry,
    timing: TimingParams,
    policy: Policy,
    lambda_us: float,
    gains: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized event simulation over gains of shape (rounds, M, 2).

    Returns (collided, n_fired, first_firer) arrays. first_firer is -1 for
    rounds in which no relay can fire.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 3 or gains.shape[1] != geom.m or gains.shape[2] != 2:
        raise ValueError(f"gains must have shape (rounds, {geom.m}, 2), got {gains.shape}")
    if not (lambda_us > 0 and math.isfinite(lambda_us)):
        raise ValueError(f"lambda_us must be positive, got {lambda_us}")
    n, r = _check_geometry(geom, timing)
    h = policy_values_array(policy, gains[:, :, 0], gains[:, :, 1])
    with np.errstate(divide="ignore"):
        timers = np.where(h > 0, lambda_us / h, np.inf)
    fire = n[None, :] + timers
    fired, b, _ = _fired_mask(n, r, timing, fire, geom.m)
    n_fired = fired.sum(axis=1)
    collided = n_fired >= 2
    first = np.where(n_fired > 0, b, -1)
    return collided, n_fired, first


def simulate_round(
    geom: NodeGeometry,
    timing: TimingParams,
    policy: Policy,
    lambda_us: float,
    gains,
) -> RoundTrace:
    """Run one round and return the full event trace."""
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (geom.m, 2):
        raise ValueError(f"gains must have shape ({geom.m}, 2), got {gains.shape}")
    n, r = _check_geometry(geom, timing)
    h = policy_values_array(policy, gains[:, 0], gains[:, 1])
    with np.errstate(divide="ignore"):
        timers = np.where(h > 0, lambda_us / h, np.inf)
    fire = (n + timers)[None, :]
    fired, b, arrival = _fired_mask(n, r, timing, fire, geom.m)
    fired = fired[0]
    arrival = arrival[0]
    any_fire = bool(fired.any())
    winner = int(b[0]) if any_fire else None
    hear = arrival.copy()
    if winner is not None:
        hear[winner] = np.nan
    outcome = SelectionOutcome(
        winner=winner,
        timers=tuple(timers.tolist()),
        h_values=tuple(h.tolist()),
        collided=bool(fired.sum() >= 2),
        window_c=collision_window(timing),
    )
    return RoundTrace(
        cts_arrivals=tuple(n.tolist()),
        scheduled_fire=tuple((n + timers).tolist()),
        hear_times=tuple(hear.tolist()),
        fired=tuple(bool(x) for x in fired),
        winner_fire_time=float(fire[0, winner]) if winner is not None else math.nan,
        outcome=outcome,
    )
