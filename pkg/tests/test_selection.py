import math

import numpy as np
import pytest

from opprelay.rng import substream
from opprelay.selection import (Policy, TimingParams, collision_window,
                                policy_value, run_selection_round, timer_value)


def test_policy_min():
    assert policy_value(Policy.MIN, 0.5, 2.0) == 0.5
    assert policy_value(Policy.MIN, 2.0, 0.5) == 0.5


def test_policy_harmonic():
    # 2*1*3/(1+3)
    assert policy_value(Policy.HARMONIC, 1.0, 3.0) == pytest.approx(1.5)
    rng = substream(11, "harmonic-equal")
    for x in rng.exponential(size=50):
        assert policy_value(Policy.HARMONIC, x, x) == pytest.approx(x)
    assert policy_value(Policy.HARMONIC, 0.0, 5.0) == 0.0
    assert policy_value(Policy.HARMONIC, 0.0, 0.0) == 0.0


def test_policy_rejects_negative_gains():
    for pol in Policy:
        with pytest.raises(ValueError):
            policy_value(pol, -0.1, 1.0)


def test_harmonic_between_min_and_max():
    rng = substream(11, "harmonic-bounds")
    g = rng.exponential(size=(200, 2))
    for g1, g2 in g:
        h = policy_value(Policy.HARMONIC, g1, g2)
        assert min(g1, g2) <= h <= 2 * min(g1, g2)


def test_timer_value():
    assert timer_value(1000.0, 2.0) == 500.0
    assert timer_value(123.0, 1.0) == 123.0
    assert timer_value(200.0, 0.25) == 800.0
    assert timer_value(1000.0, 0.0) == math.inf
    with pytest.raises(ValueError):
        timer_value(0.0, 1.0)
    with pytest.raises(ValueError):
        timer_value(1000.0, -1.0)


def test_collision_window():
    t = TimingParams(r_max=0.33, cts_skew_max=0.33, d_s=5.0, dur=1.0,
                     n_max=0.33, hidden=False)
    assert collision_window(t) == pytest.approx(5.66)
    hidden = TimingParams(r_max=0.33, cts_skew_max=0.33, d_s=5.0, dur=1.0,
                          n_max=0.33, hidden=True)
    assert collision_window(hidden) == pytest.approx(12.32)
    zero = TimingParams(0, 0, 0, 0, 0, hidden=True)
    assert collision_window(zero) == 0.0


def test_timing_params_validation():
    with pytest.raises(ValueError):
        TimingParams(r_max=-1.0)


def test_round_example_m2():
    gains = [(1.0, 2.0), (3.0, 0.5)]
    out = run_selection_round(Policy.MIN, 1000.0, 0.0, gains)
    assert out.h_values == (1.0, 0.5)
    assert out.timers == (1000.0, 2000.0)
    assert out.winner == 0
    assert not out.collided

    assert not run_selection_round(Policy.MIN, 1000.0, 600.0, gains).collided
    assert run_selection_round(Policy.MIN, 1000.0, 1200.0, gains).collided


def test_round_m1_never_collides():
    out = run_selection_round(Policy.MIN, 1000.0, 1e9, [(0.3, 0.4)])
    assert out.winner == 0
    assert not out.collided


def test_round_rejects_bad_args():
    with pytest.raises(ValueError):
        run_selection_round(Policy.MIN, 1000.0, 0.0, [])
    with pytest.raises(ValueError):
        run_selection_round(Policy.MIN, 1000.0, -1.0, [(1.0, 1.0)])


def test_dead_relays_abstain():
    # one dead hop -> infinite timer; all dead -> no winner
    out = run_selection_round(Policy.MIN, 1000.0, 5.0, [(0.0, 2.0), (1.0, 1.0)])
    assert out.winner == 1
    assert math.isinf(out.timers[0])
    all_dead = run_selection_round(Policy.HARMONIC, 1000.0, 5.0, [(0.0, 1.0), (2.0, 0.0)])
    assert all_dead.winner is None
    assert not all_dead.collided


def test_winner_maximizes_h():
    rng = substream(11, "winner-argmax")
    for _ in range(200):
        gains = list(map(tuple, rng.exponential(size=(5, 2))))
        for pol in Policy:
            out = run_selection_round(pol, 1000.0, 2.0, gains)
            assert out.winner == int(np.argmax(out.h_values))


def test_scaling_invariance():
    # winner is invariant under lambda scaling; collided under joint (lambda, c) scaling
    rng = substream(11, "scaling")
    for _ in range(100):
        gains = list(map(tuple, rng.exponential(size=(4, 2))))
        k = float(rng.uniform(0.1, 50.0))
        base = run_selection_round(Policy.MIN, 1000.0, 7.0, gains)
        scaled = run_selection_round(Policy.MIN, 1000.0 * k, 7.0 * k, gains)
        assert scaled.winner == base.winner
        assert scaled.collided == base.collided
        lam_only = run_selection_round(Policy.MIN, 1000.0 * k, 7.0, gains)
        assert lam_only.winner == base.winner


def test_window_monotonicity():
    rng = substream(11, "window-mono")
    for _ in range(100):
        gains = list(map(tuple, rng.exponential(size=(4, 2))))
        flags = [run_selection_round(Policy.MIN, 1000.0, c, gains).collided
                 for c in (0.0, 5.0, 50.0, 500.0)]
        # once collided, enlarging the window keeps it collided
        assert flags == sorted(flags)
