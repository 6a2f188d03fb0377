import numpy as np
import pytest

from quasidiff.exit_solver import (
    ConcavityError,
    SkipFreeChain,
    exit_time_one_sided,
    exit_time_oracle,
    exit_times_absorbing,
    hitting_probability,
    hitting_probability_chain,
    natural_conductances,
    speed_from_exit_times,
    window_chain,
)


def chain_on(states, masses, absorb_ends=True):
    states = np.asarray(states, dtype=float)
    n = len(states)
    absorbing = np.zeros(n, dtype=bool)
    if absorb_ends:
        absorbing[0] = absorbing[-1] = True
    return SkipFreeChain(states, np.asarray(masses, dtype=float),
                         natural_conductances(states), absorbing)


# ---------------------------------------------------------------------------
# Hitting probabilities
# ---------------------------------------------------------------------------


def test_hitting_probability_boundaries():
    assert hitting_probability(0.0, 0.0, 3.0) == 0.0
    assert hitting_probability(3.0, 0.0, 3.0) == 1.0
    assert hitting_probability(1.0, 0.0, 3.0) == pytest.approx(1 / 3)


def test_hitting_probability_custom_scale():
    s = lambda x: x ** 3
    assert hitting_probability(1.0, 0.0, 2.0, s) == pytest.approx(1 / 8)


def test_hitting_probability_degenerate():
    with pytest.raises(ValueError):
        hitting_probability(0.0, 1.0, 1.0)


def test_chain_solve_matches_formula_exactly():
    # the embedded-walk linear solve is an independent oracle for the ratio formula
    rng = np.random.default_rng(5)
    for _ in range(5):
        states = np.sort(rng.uniform(0, 10, size=rng.integers(4, 9)))
        states[0], states[-1] = 0.0, 10.0
        masses = rng.uniform(0.5, 2.0, size=len(states))
        ch = chain_on(states, masses)
        for x in states[1:-1]:
            lhs = hitting_probability_chain(ch, float(x), 0.0, 10.0)
            rhs = hitting_probability(float(x), 0.0, 10.0)
            assert lhs == pytest.approx(rhs, abs=1e-12)


# ---------------------------------------------------------------------------
# Exit times
# ---------------------------------------------------------------------------


def test_three_state_exit_time():
    ch = chain_on([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
    states, h = exit_time_oracle(ch, 0.0, 2.0)
    assert h[0] == 0.0 and h[-1] == 0.0
    assert h[1] == pytest.approx(1.0)


def test_four_state_exit_time_symmetric():
    ch = chain_on([0.0, 1.0, 2.0, 3.0], [1.0, 1.0, 1.0, 1.0])
    _, h = exit_time_oracle(ch, 0.0, 3.0)
    assert h[1] == pytest.approx(2.0)
    assert h[2] == pytest.approx(2.0)


def test_exit_requires_absorbing_ends():
    ch = chain_on([0.0, 1.0, 2.0], [1.0, 1.0, 1.0], absorb_ends=False)
    with pytest.raises(ValueError):
        exit_times_absorbing(ch)


def test_round_trip_recovery_exact():
    rng = np.random.default_rng(11)
    for _ in range(6):
        states = np.sort(rng.uniform(0, 5, size=rng.integers(5, 10)))
        states += np.arange(len(states)) * 1e-3  # enforce distinctness
        masses = rng.uniform(0.2, 3.0, size=len(states))
        ch = chain_on(states, masses)
        st, h = exit_time_oracle(ch, float(states[0]), float(states[-1]))
        ist, rec = speed_from_exit_times(st, h)
        assert np.allclose(rec, masses[1:-1], rtol=1e-12, atol=1e-12)


def test_recovery_from_tent_profile():
    ist, rec = speed_from_exit_times(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0]))
    assert ist.tolist() == [1.0]
    assert rec[0] == pytest.approx(1.0)


def test_recovery_affine_across_gap_is_massless():
    # affine stretch between states recovers zero mass at an intermediate node
    states = np.array([0.0, 1.0, 2.0, 3.0])
    h = np.array([0.0, 1.0, 0.5, 0.0])
    ist, rec = speed_from_exit_times(states, h)
    assert rec[1] == pytest.approx(-0.5 * ((-0.5) - (-0.5)))
    assert rec[1] == 0.0


def test_concavity_violation_detected():
    with pytest.raises(ConcavityError):
        speed_from_exit_times(np.array([0.0, 1.0, 2.0]), np.array([0.0, -1.0, 0.0]))


def test_windowing_consistency():
    # second differences restrict consistently to interior sub-windows
    states = np.linspace(0.0, 4.0, 9)
    masses = np.linspace(0.5, 2.5, 9)
    ch = chain_on(states, masses)
    st_big, h_big = exit_time_oracle(ch, 0.0, 4.0)
    st_small, h_small = exit_time_oracle(ch, 0.5, 3.5)
    _, rec_big = speed_from_exit_times(st_big, h_big)
    _, rec_small = speed_from_exit_times(st_small, h_small)
    # states strictly inside (0.5, 3.5) get identical masses from both solves
    inner_big = dict(zip(st_big[1:-1], rec_big))
    inner_small = dict(zip(st_small[1:-1], rec_small))
    for x, mass in inner_small.items():
        if 0.5 < x < 3.5 and x in inner_big:
            assert mass == pytest.approx(inner_big[x], rel=1e-10)


def test_one_sided_exit_times():
    # two reflecting atoms; expected hitting time of the far state from the near one
    ch = SkipFreeChain(np.array([0.0, 1.0]), np.array([1.0, 1.0]),
                       natural_conductances(np.array([0.0, 1.0])),
                       np.array([False, False]))
    states, h = exit_time_one_sided(ch, 1.0, side="right")
    # from 0: exponential holding with mean mass/conductance = 2
    assert h[0] == pytest.approx(2.0)
    assert h[1] == 0.0
    states, h_left = exit_time_one_sided(ch, 0.0, side="left")
    assert h_left[1] == pytest.approx(2.0)


def test_window_chain_insertion():
    ch = chain_on([0.0, 1.0, 2.0, 3.0], np.ones(4), absorb_ends=False)
    w = window_chain(ch, 0.5, 2.5)
    assert w.states.tolist() == [0.5, 1.0, 2.0, 2.5]
    assert w.absorbing.tolist() == [True, False, False, True]
    assert w.conductances[0] == pytest.approx(1.0 / (2 * 0.5))
    assert w.conductances[1] == pytest.approx(0.5)


def test_holding_means():
    ch = chain_on([0.0, 0.25, 1.0], [1.0, 2.0, 1.0], absorb_ends=False)
    c01 = 1 / (2 * 0.25)
    c12 = 1 / (2 * 0.75)
    assert ch.holding_mean(1) == pytest.approx(2.0 / (c01 + c12))


def test_one_sided_asymmetric_spacing():
    # states {0, 1, 3}, unit masses, reflecting right end, target 0:
    # renewal argument gives E_1[T_0] = (m(1)+m(3)) / c(0,1) = 4 and
    # E_3[T_0] = E_3[T_1] + E_1[T_0] = m(3)/c(1,3) + 4 = 8
    states = np.array([0.0, 1.0, 3.0])
    ch = SkipFreeChain(states, np.ones(3), natural_conductances(states),
                       np.zeros(3, dtype=bool))
    st, h = exit_time_one_sided(ch, 0.0, side="left")
    assert h[0] == 0.0
    assert h[1] == pytest.approx(4.0)
    assert h[2] == pytest.approx(8.0)
