"""Fading channel-gain models.

Channel state is carried as power gains |a|^2 only; phases are never
materialized because relay selection reacts to link strengths. Rayleigh
amplitude fading makes the power gain exponential; Ricean fading (one
dominant path of power K/(K+1) plus scattered power 1/(K+1), scaled by the
mean power) makes it noncentral chi-square with 2 degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "FadingKind",
    "FadingModel",
    "RelayProfile",
    "TopologyCase",
    "Topology",
    "sample_power_gain",
    "beta_from_distance",
    "topology_case",
]


class FadingKind(Enum):
    RAYLEIGH = "rayleigh"
    RICEAN = "ricean"


@dataclass(frozen=True)
class FadingModel:
    """One directed link's fading law: E[|a|^2] = mean_power.

    k_factor is the Ricean ratio of dominant-path power to scattered power;
    Rayleigh is the k_factor = 0 special case and must be declared as such.
    """

    kind: FadingKind = FadingKind.RAYLEIGH
    k_factor: float = 0.0
    mean_power: float = 1.0

    def __post_init__(self):
        if not (self.mean_power > 0 and math.isfinite(self.mean_power)):
            raise ValueError(f"mean_power must be positive and finite, got {self.mean_power}")
        if not (self.k_factor >= 0 and math.isfinite(self.k_factor)):
            raise ValueError(f"k_factor must be nonnegative and finite, got {self.k_factor}")
        if self.kind is FadingKind.RAYLEIGH and self.k_factor != 0.0:
            raise ValueError("Rayleigh fading requires k_factor == 0")


@dataclass(frozen=True)
class RelayProfile:
    """Expected-power (rate) parameters of one relay's two hops.

    beta1 is the exponential rate of the source->relay power gain
    (E[|a_sr|^2] = 1/beta1) and beta2 the relay->destination rate.
    """

    beta1: float
    beta2: float

    def __post_init__(self):
        for name, b in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not (b > 0 and math.isfinite(b)):
                raise ValueError(f"{name} must be positive and finite, got {b}")


class TopologyCase(Enum):
    MIDWAY = "midway"    # relays clustered at d/2
    THIRD = "third"      # relays clustered at d/3 from the source
    TENTH = "tenth"      # relays clustered at d/10 from the source
    LINE = "line"        # equidistant line network between source and destination
    CUSTOM = "custom"


def beta_from_distance(distance_ratio: float, exponent_v: float) -> float:
    """Rate parameter for a hop at `distance_ratio` times the reference range.

    Mean power decays as (1/distance_ratio)^v, so beta = distance_ratio^v.
    """
    if not (distance_ratio > 0 and math.isfinite(distance_ratio)):
        raise ValueError(f"distance_ratio must be positive, got {distance_ratio}")
    if not (exponent_v > 0 and math.isfinite(exponent_v)):
        raise ValueError(f"exponent_v must be positive, got {exponent_v}")
    return distance_ratio ** exponent_v


def _case_profiles(case_id: TopologyCase, exponent_v: float, m: int) -> list[RelayProfile]:
    # Distances are normalized so the reference hop (half the source-destination
    # separation) has ratio 1. Clustered cases put every relay at the same spot.
    if case_id is TopologyCase.MIDWAY:
        return [RelayProfile(1.0, 1.0)] * m
    if case_id is TopologyCase.THIRD:
        b1 = beta_from_distance(2.0 / 3.0, exponent_v)
        b2 = beta_from_distance(4.0 / 3.0, exponent_v)
        return [RelayProfile(b1, b2)] * m
    if case_id is TopologyCase.TENTH:
        b1 = beta_from_distance(1.0 / 5.0, exponent_v)
        b2 = beta_from_distance(9.0 / 5.0, exponent_v)
        return [RelayProfile(b1, b2)] * m
    if case_id is TopologyCase.LINE:
        # relay k of m sits at k/(m+1) of the source-destination separation
        profiles = []
        for k in range(1, m + 1):
            d_sr = 2.0 * k / (m + 1)
            d_rd = 2.0 * (m + 1 - k) / (m + 1)
            profiles.append(RelayProfile(beta_from_distance(d_sr, exponent_v),
                                         beta_from_distance(d_rd, exponent_v)))
        return profiles
    raise ValueError(f"no canonical profiles for {case_id}")


@dataclass(frozen=True)
class Topology:
    """Named or custom assignment of per-relay (beta1, beta2) pairs."""

    case_id: TopologyCase
    exponent_v: float
    profiles: tuple[RelayProfile, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.exponent_v > 0 and math.isfinite(self.exponent_v)):
            raise ValueError(f"exponent_v must be positive, got {self.exponent_v}")
        if len(self.profiles) < 1:
            raise ValueError("topology needs at least one relay profile")
        if self.case_id is not TopologyCase.CUSTOM:
            expected = _case_profiles(self.case_id, self.exponent_v, len(self.profiles))
            for i, (got, want) in enumerate(zip(self.profiles, expected)):
                if not (math.isclose(got.beta1, want.beta1, rel_tol=1e-12)
                        and math.isclose(got.beta2, want.beta2, rel_tol=1e-12)):
                    raise ValueError(
                        f"profile {i} does not match the canonical {self.case_id.value} "
                        f"assignment: got {got}, expected {want}")

    @property
    def m(self) -> int:
        return len(self.profiles)


def topology_case(case_id: TopologyCase, exponent_v: float, m: int) -> Topology:
    """Build one of the canonical clustered/line topologies for m relays."""
    return Topology(case_id, exponent_v, tuple(_case_profiles(case_id, exponent_v, m)))


def sample_power_gain(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw |a|^2 under `model`; returns a scalar when size is None.

    Rayleigh: Exponential(mean_power). Ricean: |A + s(N1 + jN2)|^2 with
    A^2 = K/(K+1) mean_power and 2 s^2 = mean_power/(K+1).
    """
    if model.kind is FadingKind.RAYLEIGH or model.k_factor == 0.0:
        out = rng.exponential(scale=model.mean_power, size=size)
    else:
        k = model.k_factor
        a = math.sqrt(k / (k + 1.0) * model.mean_power)
        s = math.sqrt(model.mean_power / (2.0 * (k + 1.0)))
        re = a + s * rng.standard_normal(size)
        im = s * rng.standard_normal(size)
        out = re * re + im * im
    return float(out) if size is None else out


def sample_hop_gains(
    profiles,
    rng: np.random.Generator,
    n: int,
    kind: FadingKind = FadingKind.RAYLEIGH,
    k_factor: float = 0.0,
):
    """Draw (n, M) arrays of source->relay and relay->destination power gains.

    Vectorized bulk form of sample_power_gain used by the Monte Carlo loops;
    mean powers per relay come from `profiles` (1/beta1, 1/beta2).
    """
    mean1 = np.array([1.0 / p.beta1 for p in profiles])
    mean2 = np.array([1.0 / p.beta2 for p in profiles])
    m = len(profiles)
    if kind is FadingKind.RAYLEIGH or k_factor == 0.0:
        g1 = rng.exponential(size=(n, m)) * mean1
        g2 = rng.exponential(size=(n, m)) * mean2
        return g1, g2
    k = k_factor
    los = k / (k + 1.0)
    scat_half = 1.0 / (2.0 * (k + 1.0))
    out = []
    for mean in (mean1, mean2):
        a = np.sqrt(los * mean)
        s = np.sqrt(scat_half * mean)
        re = a + s * rng.standard_normal((n, m))
        im = s * rng.standard_normal((n, m))
        out.append(re * re + im * im)
    return out[0], out[1]
