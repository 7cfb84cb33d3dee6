import math

import numpy as np
import pytest
from scipy import stats

from opprelay.fading import (FadingKind, FadingModel, RelayProfile, Topology,
                             TopologyCase, beta_from_distance,
                             sample_power_gain, sample_hop_gains, topology_case)
from opprelay.rng import substream
from oracles import exp_cdf, ks_statistic


def test_model_validation():
    with pytest.raises(ValueError):
        FadingModel(mean_power=0.0)
    with pytest.raises(ValueError):
        FadingModel(k_factor=-0.5)
    with pytest.raises(ValueError):
        FadingModel(kind=FadingKind.RAYLEIGH, k_factor=1.0)
    FadingModel(kind=FadingKind.RICEAN, k_factor=1.0)  # ok


def test_rayleigh_mean_and_cdf_point():
    rng = substream(2024, "fading-mean")
    draws = sample_power_gain(FadingModel(), rng, size=1_000_000)
    assert np.mean(draws) == pytest.approx(1.0, abs=0.01)
    # closed-form exponential CDF evaluated independently
    frac = np.mean(draws <= 0.5)
    assert frac == pytest.approx(1.0 - math.exp(-0.5), abs=0.002)


def test_ricean_equal_power_mean():
    model = FadingModel(FadingKind.RICEAN, k_factor=1.0, mean_power=1.0)
    rng = substream(2024, "ricean-mean")
    draws = sample_power_gain(model, rng, size=1_000_000)
    assert np.mean(draws) == pytest.approx(1.0, abs=0.01)


def test_ricean_mean_power_scaling():
    model = FadingModel(FadingKind.RICEAN, k_factor=3.0, mean_power=2.5)
    rng = substream(2024, "ricean-scale")
    draws = sample_power_gain(model, rng, size=500_000)
    assert np.mean(draws) == pytest.approx(2.5, rel=0.01)


def test_rayleigh_ks_distance():
    rng = substream(2024, "fading-ks")
    draws = sample_power_gain(FadingModel(mean_power=1.7), rng, size=1_000_000)
    assert ks_statistic(draws, lambda x: exp_cdf(x, mean=1.7)) < 0.002


def test_ricean_k0_equals_rayleigh():
    model = FadingModel(FadingKind.RICEAN, k_factor=0.0, mean_power=1.0)
    rng = substream(2024, "ricean-vs-rayleigh")
    a = sample_power_gain(model, rng, size=100_000)
    b = sample_power_gain(FadingModel(), rng, size=100_000)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_min_of_two_exponentials_rate_adds():
    # underpins the min-policy timer law
    b1, b2 = 0.7, 2.2
    rng = substream(2024, "min-exp")
    g1 = sample_power_gain(FadingModel(mean_power=1 / b1), rng, size=1_000_000)
    g2 = sample_power_gain(FadingModel(mean_power=1 / b2), rng, size=1_000_000)
    lo = np.minimum(g1, g2)
    assert ks_statistic(lo, lambda x: exp_cdf(x, mean=1 / (b1 + b2))) < 0.002


def test_scalar_draw():
    rng = substream(2024, "scalar")
    x = sample_power_gain(FadingModel(), rng)
    assert isinstance(x, float) and x >= 0


def test_beta_from_distance():
    assert beta_from_distance(1.0, 3.0) == pytest.approx(1.0)
    assert beta_from_distance(2 / 3, 3.0) == pytest.approx((2 / 3) ** 3)
    assert beta_from_distance(12 / 7, 4.0) == pytest.approx((12 / 7) ** 4, rel=1e-12)
    with pytest.raises(ValueError):
        beta_from_distance(0.0, 3.0)
    with pytest.raises(ValueError):
        beta_from_distance(1.0, -2.0)


def test_named_topologies_match_canonical_betas():
    v = 3.0
    third = topology_case(TopologyCase.THIRD, v, 6)
    assert all(p.beta1 == pytest.approx((2 / 3) ** v) for p in third.profiles)
    assert all(p.beta2 == pytest.approx((4 / 3) ** v) for p in third.profiles)
    tenth = topology_case(TopologyCase.TENTH, v, 6)
    assert tenth.profiles[0].beta1 == pytest.approx((1 / 5) ** v)
    assert tenth.profiles[0].beta2 == pytest.approx((9 / 5) ** v)
    line = topology_case(TopologyCase.LINE, v, 6)
    # closest-to-source relay and its mirror at the destination end
    assert line.profiles[0].beta1 == pytest.approx((2 / 7) ** v)
    assert line.profiles[0].beta2 == pytest.approx((12 / 7) ** v)
    assert line.profiles[5].beta1 == pytest.approx((12 / 7) ** v)
    assert line.profiles[5].beta2 == pytest.approx((2 / 7) ** v)
    assert line.profiles[2].beta1 == pytest.approx((6 / 7) ** v)
    assert line.profiles[2].beta2 == pytest.approx((8 / 7) ** v)


def test_topology_invariant_rejects_wrong_profiles():
    with pytest.raises(ValueError):
        Topology(TopologyCase.THIRD, 3.0, (RelayProfile(1.0, 1.0),))
    custom = Topology(TopologyCase.CUSTOM, 3.0, (RelayProfile(0.5, 2.0),))
    assert custom.m == 1


def test_bulk_hop_gains_match_profiles():
    profiles = [RelayProfile(0.5, 2.0), RelayProfile(2.0, 0.5)]
    rng = substream(2024, "bulk")
    g1, g2 = sample_hop_gains(profiles, rng, 400_000)
    assert np.mean(g1[:, 0]) == pytest.approx(2.0, rel=0.02)
    assert np.mean(g1[:, 1]) == pytest.approx(0.5, rel=0.02)
    assert np.mean(g2[:, 0]) == pytest.approx(0.5, rel=0.02)
    assert np.mean(g2[:, 1]) == pytest.approx(2.0, rel=0.02)
