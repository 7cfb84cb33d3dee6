import math

import numpy as np
import pytest

from opprelay.dmt import (DmtScenario, FixedRate, InsufficientTrialsError,
                          MultiplexRate, OutageSample, Scheme,
                          best_relay_gains_batch, check_lemma4_inequality,
                          diversity_slope, lemma2_exponent, outage_af,
                          outage_curve, outage_df, outage_point,
                          select_best_relay_gains)
from opprelay.rng import substream
from oracles import direct_outage_closed_form, ks_statistic


def test_select_single_relay_passthrough():
    rng = substream(21, "select-m1")
    probe = substream(21, "select-m1")
    u, v = select_best_relay_gains(1, rng)
    exp = probe.exponential(size=1), probe.exponential(size=1)
    assert (u, v) == (float(exp[0][0]), float(exp[1][0]))


def test_select_consistency_max_of_mins():
    # composing selection with min reproduces the max of the per-relay mins
    rng = substream(21, "select-consistency")
    for m in (2, 3, 5):
        g1 = rng.exponential(size=(500, m))
        g2 = rng.exponential(size=(500, m))
        mins = np.minimum(g1, g2)
        j = np.argmax(mins, axis=1)
        rows = np.arange(500)
        assert np.all(np.minimum(g1[rows, j], g2[rows, j]) == mins.max(axis=1))


def test_selected_min_law_m3():
    # CDF of the selected pair's min is (1 - e^{-2x})^3: max of 3 iid Exp(2)
    rng = substream(21, "select-law")
    u, v = best_relay_gains_batch(3, rng, 400_000)
    mins = np.minimum(u, v)
    ks = ks_statistic(mins, lambda x: (1.0 - np.exp(-2.0 * x)) ** 3)
    assert ks < 0.003


def test_selected_arm_dominates_min():
    rng = substream(21, "select-arm")
    u, v = best_relay_gains_batch(3, rng, 200_000)
    mins = np.minimum(u, v)
    for x in (0.05, 0.2, 0.5, 1.0, 2.0):
        assert np.mean(u <= x) <= np.mean(mins <= x)


def test_outage_df_hand_example():
    # rho=3, R=1: relay decodes (0.5 log2 7 > 1), combined 0.5 log2 4 = 1 <= 1
    s = OutageSample(gain_sd=0.5, gain_sr=2.0, gain_rd=0.5)
    assert outage_df(s, 3.0, 1.0) is True
    assert s.decoded is True


def test_outage_df_zero_gains_and_high_snr():
    s = OutageSample(0.0, 0.0, 0.0)
    assert outage_df(s, 10.0, 0.5) is True
    s2 = OutageSample(0.4, 1.2, 0.8)
    assert outage_df(s2, 1e9, 1.0) is False


def test_outage_df_not_decoded_branch():
    # weak source-relay hop: outage decided by the direct link alone
    s = OutageSample(gain_sd=5.0, gain_sr=1e-6, gain_rd=100.0)
    assert outage_df(s, 10.0, 1.0) is False
    assert s.decoded is False
    s_bad = OutageSample(gain_sd=1e-6, gain_sr=1e-6, gain_rd=100.0)
    assert outage_df(s_bad, 10.0, 1.0) is True


def test_outage_af_hand_values():
    # f(1,1) = 1/3, f(0,b) = 0
    s = OutageSample(0.0, 3.0, 3.0)
    rho = 1.0
    # I = 0.5 log2(1 + 9/7)
    info = 0.5 * math.log2(1.0 + 9.0 / 7.0)
    assert outage_af(s, rho, info + 1e-9) is True
    assert outage_af(s, rho, info - 1e-9) is False


def test_af_relayed_gain_below_weaker_hop():
    rng = substream(21, "af-bound")
    for a, b in rng.exponential(size=(300, 2)):
        f = a * b / (a + b + 1.0)
        assert f < min(a, b)


def test_direct_curve_matches_closed_form():
    scn = DmtScenario(m=1, snr_db_grid=(5.0, 10.0, 15.0), rate_rule=FixedRate(1.0),
                      scheme=Scheme.DIRECT, trials_per_point=500_000)
    for rho_db, pe, se in outage_curve(scn, 77):
        rho = 10 ** (rho_db / 10)
        assert abs(pe - direct_outage_closed_form(rho, 1.0)) <= 3 * se


def test_conditional_estimator_agrees_with_indicator():
    for scheme in (Scheme.OPP_DF, Scheme.OPP_AF):
        rho = 10.0 ** 1.2
        ind, se_i = outage_point(scheme, 2, rho, 1.0, 400_000, 31, estimator="indicator")
        cond, se_c = outage_point(scheme, 2, rho, 1.0, 400_000, 32, estimator="conditional")
        assert abs(ind - cond) <= 3 * math.hypot(se_i, se_c)
        assert se_c < se_i  # that is the point of conditioning


def test_conditional_rejected_for_direct():
    with pytest.raises(ValueError):
        outage_point(Scheme.DIRECT, 1, 100.0, 1.0, 10_000, 1, estimator="conditional")


def test_relaying_beats_direct_at_20db():
    rho = 100.0
    direct, se_d = outage_point(Scheme.DIRECT, 1, rho, 1.0, 1_000_000, 55)
    af, se_a = outage_point(Scheme.OPP_AF, 2, rho, 1.0, 1_000_000, 55)
    assert af + 3 * math.hypot(se_d, se_a) < direct


def test_outage_monotonicity_in_rho_and_rate():
    s = OutageSample(0.3, 0.8, 0.5)
    flags_rho = [outage_af(s, rho, 1.0) for rho in (1.0, 10.0, 100.0, 1000.0)]
    assert flags_rho == sorted(flags_rho, reverse=True)
    flags_rate = [outage_af(s, 10.0, r) for r in (0.25, 0.5, 1.0, 2.0, 4.0)]
    assert flags_rate == sorted(flags_rate)


def test_diversity_slope_exact_power_law():
    curve = [(rho_db, (10 ** (rho_db / 10.0)) ** -2.0) for rho_db in (10, 20, 30, 40)]
    assert diversity_slope(curve, (10, 40)) == pytest.approx(2.0, abs=1e-6)


def test_diversity_slope_errors():
    curve = [(10, 1e-2), (20, 1e-3), (30, 0.0), (40, 1e-5)]
    with pytest.raises(InsufficientTrialsError):
        diversity_slope(curve, (10, 40))
    with pytest.raises(ValueError):
        diversity_slope(curve[:2], (10, 40))


def test_lemma4_vacuous_and_symmetric():
    # huge f -> antecedent false -> implication vacuously true
    assert check_lemma4_inequality(50.0, 50.0, 10.0, 0.25)
    assert check_lemma4_inequality(0.3, 0.3, 25.0, 0.1)
    with pytest.raises(ValueError):
        check_lemma4_inequality(1.0, 1.0, 0.5, 0.25)
    with pytest.raises(ValueError):
        check_lemma4_inequality(1.0, 1.0, 10.0, 0.7)


def test_lemma4_randomized_no_violations():
    rng = substream(21, "lemma4")
    n = 200_000
    a = rng.exponential(size=n)
    b = rng.exponential(size=n)
    rho = 10 ** rng.uniform(0.01, 6, size=n)
    r = rng.uniform(0.01, 0.49, size=n)
    f = rho * a * rho * b / (rho * a + rho * b + 1.0)
    antecedent = f <= rho ** (2 * r)
    bound = rho ** (2 * r - 1) + rho ** (r - 1) * np.sqrt(1.0 + rho ** (2 * r))
    consequent = np.minimum(a, b) <= bound
    assert not np.any(antecedent & ~consequent)


def test_lemma2_exponents():
    for m in (1, 2, 3):
        slope = lemma2_exponent(m, 1.0)
        assert abs(slope - m) / m < 0.10
    # and for a non-unit decay exponent
    assert abs(lemma2_exponent(2, 0.5) - 1.0) < 0.10


def test_scenario_validation():
    with pytest.raises(ValueError):
        DmtScenario(0, (10.0,), FixedRate(1.0), Scheme.DIRECT, 10_000)
    with pytest.raises(ValueError):
        DmtScenario(1, (10.0,), FixedRate(1.0), Scheme.DIRECT, 5_000)
    with pytest.raises(ValueError):
        MultiplexRate(0.5)
    with pytest.raises(ValueError):
        MultiplexRate(0.0)
    with pytest.raises(ValueError):
        FixedRate(0.0)


def test_multiplex_rate_rule():
    rule = MultiplexRate(0.25)
    assert rule.rate_at(100.0) == pytest.approx(0.25 * math.log2(100.0))


def test_outage_point_thread_determinism():
    a = outage_point(Scheme.OPP_DF, 2, 100.0, 1.0, 200_000, 99, threads=1)
    b = outage_point(Scheme.OPP_DF, 2, 100.0, 1.0, 200_000, 99, threads=4)
    assert a == b
