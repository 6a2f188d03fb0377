import math

import numpy as np
import pytest

from quasidiff.gallery import random_walk, snapping_out
from quasidiff.verify import (
    mc_exit_time,
    mc_hitting,
    mc_jump_rate_martingale,
    mc_martingale_scale,
    mc_speed_recovery,
    verify_suite,
)


def test_mc_hitting_simple_walk():
    t = random_walk([0, 1, 2, 3], [1, 1, 1, 1])
    res = mc_hitting(t, 1.0, 0.0, 3.0, n_paths=40_000, seed=12)
    assert res.reference == pytest.approx(1 / 3)
    assert res.details["chain_oracle"] == pytest.approx(1 / 3, abs=1e-12)
    assert res.passed and abs(res.z) <= 4
    assert res.truncated_fraction == 0.0


def test_mc_hitting_snaps_start_point():
    t = random_walk([0, 1, 2, 3], [1, 1, 1, 1])
    res = mc_hitting(t, 1.1, 0.0, 3.0, n_paths=5_000, seed=1)
    assert res.details["x_used"] == 1.0
    assert res.reference == pytest.approx(1 / 3)


def test_mc_hitting_deterministic():
    t = random_walk([0, 1, 2, 3], [1, 1, 1, 1])
    a = mc_hitting(t, 1.0, 0.0, 3.0, n_paths=8_000, seed=5)
    b = mc_hitting(t, 1.0, 0.0, 3.0, n_paths=8_000, seed=5, threads=4)
    assert a.estimate == b.estimate and a.z == b.z


def test_mc_hitting_rejects_gap_window():
    t = snapping_out(2.0)
    with pytest.raises(ValueError):
        mc_hitting(t, -0.5, -2.0, 0.5, n_paths=100, seed=0)  # b inside the gap


def test_mc_hitting_rejects_inaccessible_edge():
    t = snapping_out(2.0)  # natural at both infinite endpoints
    with pytest.raises(ValueError):
        mc_hitting(t, 0.0, -math.inf, 2.0, n_paths=100, seed=0)


def test_mc_exit_time_three_states():
    t = random_walk([0, 1, 2], [1, 1, 1])
    res = mc_exit_time(t, 1.0, 0.0, 2.0, n_paths=40_000, seed=3)
    assert res.reference == pytest.approx(1.0)
    assert res.passed


def test_mc_exit_time_four_states():
    t = random_walk([0, 1, 2, 3], [1, 1, 1, 1])
    res = mc_exit_time(t, 2.0, 0.0, 3.0, n_paths=40_000, seed=4)
    assert res.reference == pytest.approx(2.0)
    assert res.passed


def test_mc_speed_recovery_atomic_noise_only():
    # purely atomic measure: no discretization error, only Monte Carlo noise
    t = random_walk([0, 1, 2, 3, 4], [1, 1, 1, 1, 1])
    rep = mc_speed_recovery(t, (0.0, 4.0), 4_000, [1.0], seed=6, paths_growth=1.0)
    lv = rep.levels[0]
    assert np.all(np.abs(lv.recovered - lv.expected) / lv.expected < 0.2)
    assert lv.mean_rel_error < 0.1


def test_mc_speed_recovery_convergence_study(identity_triple):
    rep = mc_speed_recovery(identity_triple, (0.0, 1.0), 1_500,
                            [0.5, 0.25, 0.125], seed=7)
    assert len(rep.levels) == 3
    assert rep.passed
    assert rep.levels[-1].mean_rel_error < rep.levels[0].mean_rel_error


def test_mc_speed_recovery_empty_deltas(identity_triple):
    rep = mc_speed_recovery(identity_triple, (0.0, 1.0), 100, [], seed=0)
    assert rep.levels == [] and rep.passed


def test_mc_jump_rate_martingale_snapping_out():
    t = snapping_out(2.0)
    results = mc_jump_rate_martingale(t, 0, [0.5, 2.0], n_paths=30_000, seed=11, delta=0.25)
    assert len(results) == 2
    for r in results:
        assert r.passed, (r.z, r.estimate, r.reference)
        assert r.estimate == pytest.approx(r.reference, rel=0.2)
    # later time sees more jumps
    assert results[1].estimate > results[0].estimate


def test_mc_jump_rate_martingale_requires_gap(identity_triple):
    with pytest.raises(ValueError):
        mc_jump_rate_martingale(identity_triple, 0, [1.0], n_paths=100, seed=0)


def test_mc_martingale_scale_constant(identity_triple):
    res = mc_martingale_scale(identity_triple, 0.5, 0.0, 1.0,
                              [0.02, 0.05, 0.1, 0.2, 0.4], n_paths=30_000, seed=13)
    assert res.passed
    assert res.details["means"][0] == pytest.approx(0.5, abs=0.02)


def test_mc_martingale_scale_rejects_unbounded():
    t = snapping_out(2.0)
    with pytest.raises(ValueError):
        mc_martingale_scale(t, 0.0, -math.inf, 2.0, [1.0], n_paths=100, seed=0)


def test_verify_suite_all_on_walk():
    t = random_walk([0, 1, 2, 3], [1, 1, 1, 1])
    rep = verify_suite(t, "all", n_paths=20_000, seed=2)
    assert rep.passed
    names = [c.name for c in rep.checks]
    assert "hitting" in names and "exit_time" in names and "martingale_scale" in names
    assert rep.speed is not None
    doc = rep.to_dict()
    assert doc["passed"] is True


def test_verify_suite_unknown_name(identity_triple):
    with pytest.raises(ValueError):
        verify_suite(identity_triple, "bogus", n_paths=10, seed=0)


def test_verify_suite_jumps_on_gap_triple():
    t = snapping_out(2.0)
    rep = verify_suite(t, "jumps", n_paths=15_000, seed=2)
    assert rep.checks and all(c.passed for c in rep.checks)


def test_mc_jump_rate_at_time_zero_both_sides_vanish():
    t = snapping_out(2.0)
    r0, r1 = mc_jump_rate_martingale(t, 0, [0.0, 0.5], n_paths=2_000, seed=1, delta=0.25)
    assert r0.estimate == 0.0 and r0.reference == 0.0 and r0.z == 0.0 and r0.passed
    assert r1.estimate > 0.0


def test_mc_martingale_scale_long_run_absorption_limit():
    # with both ends absorbing, the stopped mean tends to a(1-p) + b p
    t = random_walk([0, 1, 2], [1, 1, 1])
    res = mc_martingale_scale(t, 1.0, 0.0, 2.0, [0.0, 50.0], n_paths=30_000, seed=19)
    means = res.details["means"]
    assert means[0] == 1.0                      # at t=0 the mean is exactly x
    p = 0.5                                     # ratio formula for the window
    assert means[1] == pytest.approx(0.0 * (1 - p) + 2.0 * p, abs=0.02)
    assert res.passed


def test_symmetric_absorption_split():
    t = random_walk([0, 1, 2], [1, 1, 1])
    res = mc_hitting(t, 1.0, 0.0, 2.0, n_paths=20_000, seed=23)
    assert res.reference == pytest.approx(0.5)
    assert abs(res.estimate - 0.5) <= 4 * res.stderr
